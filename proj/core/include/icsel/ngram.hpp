#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace icsel {

struct NGramConfig {
    int min_order = 1;
    int max_order = 4;
};

// Word n-grams of one order, keyed by the space-joined token sequence.
// Values are occurrence counts.
using NGramCounts = std::unordered_map<std::string, double>;

// Counts for a contiguous range of orders. orders[i] holds order
// config.min_order + i.
struct NGramMultiset {
    int min_order = 1;
    std::vector<NGramCounts> orders;

    int max_order() const { return min_order + static_cast<int>(orders.size()) - 1; }
    const NGramCounts& at_order(int order) const { return orders.at(order - min_order); }
    NGramCounts& at_order(int order) { return orders.at(order - min_order); }
};

NGramMultiset extract_word_ngrams_with_counts(std::span<const std::string> tokens,
                                              const NGramConfig& config = {});

// How a matched gram's contribution is capped in the recall numerator:
// against the source's untouched count or against its decayed one.
enum class MatchedCountMode { Original, Current };

// What the geometric mean averages over: always four orders, or only the
// orders the source actually has grams left in.
enum class AverageOver { FixedFour, ActiveOrders };

struct ScoreConfig {
    MatchedCountMode matched_count = MatchedCountMode::Original;
    AverageOver average_over = AverageOver::ActiveOrders;
};

// Mutable per-source bookkeeping for repeated scoring. `original` counts are
// frozen at construction; `current` counts decay as candidates get selected.
// Entries keep extraction order so score sums are deterministic.
class SourceCoverageState {
public:
    SourceCoverageState() = default;
    SourceCoverageState(std::span<const std::string> source_tokens, const NGramConfig& config = {});

    int min_order() const { return min_order_; }
    int max_order() const { return min_order_ + static_cast<int>(per_order_.size()) - 1; }

    struct Entry {
        std::string gram;
        double original = 0.0;
        double current = 0.0;
    };

    std::span<const Entry> entries(int order) const { return per_order_.at(order - min_order_); }

    // Sum of current counts for one order. Zero means the order is inactive.
    double current_mass(int order) const;

    // Grams the candidate shares with the live state (current count > 0),
    // one list per order, lists parallel to [min_order, max_order].
    std::vector<std::vector<std::string>> matched_grams(const NGramMultiset& candidate) const;

    // Multiplies current counts of the listed grams by `lambda` (in [0, 1]).
    // Listing a gram that is not live in the state is a contract violation;
    // with lambda = 0 the grams drop out of membership entirely.
    void downweight(const std::vector<std::vector<std::string>>& matched_per_order, double lambda);

    // Recall-style overlap of `candidate` against the live state, one value
    // per order, combined as a geometric mean. Pure: the state is unchanged.
    double overlap_score(const NGramMultiset& candidate, const ScoreConfig& config = {}) const;

private:
    int min_order_ = 1;
    std::vector<std::vector<Entry>> per_order_;
    // gram -> slot in per_order_[order - min_order_]
    std::vector<std::unordered_map<std::string, std::size_t>> index_;
};

}  // namespace icsel
