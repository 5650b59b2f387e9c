#include "icsel/ngram.hpp"

#include <algorithm>
#include <cmath>

#include "icsel/errors.hpp"

namespace icsel {

namespace {

std::string join_gram(std::span<const std::string> tokens, std::size_t start, int order) {
    std::string gram = tokens[start];
    for (int k = 1; k < order; ++k) {
        gram.push_back(' ');
        gram.append(tokens[start + static_cast<std::size_t>(k)]);
    }
    return gram;
}

}  // namespace

NGramMultiset extract_word_ngrams_with_counts(std::span<const std::string> tokens,
                                              const NGramConfig& config) {
    if (config.min_order < 1 || config.max_order < config.min_order) {
        throw ContractError("n-gram order range must satisfy 1 <= min <= max");
    }
    NGramMultiset out;
    out.min_order = config.min_order;
    out.orders.resize(static_cast<std::size_t>(config.max_order - config.min_order + 1));
    for (int order = config.min_order; order <= config.max_order; ++order) {
        auto& counts = out.at_order(order);
        if (tokens.size() < static_cast<std::size_t>(order)) continue;
        std::size_t last = tokens.size() - static_cast<std::size_t>(order);
        for (std::size_t start = 0; start <= last; ++start) {
            counts[join_gram(tokens, start, order)] += 1.0;
        }
    }
    return out;
}

SourceCoverageState::SourceCoverageState(std::span<const std::string> source_tokens,
                                         const NGramConfig& config) {
    auto counts = extract_word_ngrams_with_counts(source_tokens, config);
    min_order_ = counts.min_order;
    per_order_.resize(counts.orders.size());
    index_.resize(counts.orders.size());

    // The extraction map loses positional order, so rebuild it by walking the
    // token windows again and registering each gram on first sight.
    for (int order = config.min_order; order <= config.max_order; ++order) {
        auto oi = static_cast<std::size_t>(order - min_order_);
        auto& slots = per_order_[oi];
        auto& index = index_[oi];
        if (source_tokens.size() < static_cast<std::size_t>(order)) continue;
        std::size_t last = source_tokens.size() - static_cast<std::size_t>(order);
        for (std::size_t start = 0; start <= last; ++start) {
            std::string gram = join_gram(source_tokens, start, order);
            if (index.contains(gram)) continue;
            double c = counts.at_order(order).at(gram);
            index.emplace(gram, slots.size());
            slots.push_back(Entry{std::move(gram), c, c});
        }
    }
}

double SourceCoverageState::current_mass(int order) const {
    const auto& slots = per_order_.at(static_cast<std::size_t>(order - min_order_));
    double mass = 0.0;
    for (const auto& e : slots) mass += e.current;
    return mass;
}

std::vector<std::vector<std::string>> SourceCoverageState::matched_grams(
    const NGramMultiset& candidate) const {
    std::vector<std::vector<std::string>> matched(per_order_.size());
    for (int order = min_order(); order <= max_order(); ++order) {
        if (order < candidate.min_order || order > candidate.max_order()) continue;
        auto oi = static_cast<std::size_t>(order - min_order_);
        const auto& cand = candidate.at_order(order);
        // Walk the source slots so the output order is deterministic.
        for (const auto& e : per_order_[oi]) {
            if (e.current <= 0.0) continue;
            auto it = cand.find(e.gram);
            if (it == cand.end() || it->second <= 0.0) continue;
            matched[oi].push_back(e.gram);
        }
    }
    return matched;
}

void SourceCoverageState::downweight(const std::vector<std::vector<std::string>>& matched_per_order,
                                     double lambda) {
    if (lambda < 0.0 || lambda > 1.0) throw ContractError("decay factor must lie in [0, 1]");
    if (matched_per_order.size() != per_order_.size()) {
        throw ContractError("matched gram lists do not span the state's orders");
    }
    for (std::size_t oi = 0; oi < per_order_.size(); ++oi) {
        auto& slots = per_order_[oi];
        const auto& index = index_[oi];
        for (const auto& gram : matched_per_order[oi]) {
            auto it = index.find(gram);
            if (it == index.end() || slots[it->second].current <= 0.0) {
                throw ContractError("cannot decay a gram that is not live in the source: " + gram);
            }
            slots[it->second].current *= lambda;
        }
    }
}

double SourceCoverageState::overlap_score(const NGramMultiset& candidate,
                                          const ScoreConfig& config) const {
    double log_sum = 0.0;
    int active = 0;
    bool any_zero = false;

    for (int order = min_order(); order <= max_order(); ++order) {
        auto oi = static_cast<std::size_t>(order - min_order_);
        const auto& slots = per_order_[oi];

        double denom = 0.0;
        for (const auto& e : slots) denom += e.current;
        if (denom <= 0.0) continue;  // order has decayed away or never existed
        ++active;

        double num = 0.0;
        if (order >= candidate.min_order && order <= candidate.max_order()) {
            const auto& cand = candidate.at_order(order);
            // Walk source entries in extraction order so the float sum is
            // reproducible regardless of the candidate map's layout.
            for (const auto& e : slots) {
                if (e.current <= 0.0) continue;
                auto it = cand.find(e.gram);
                if (it == cand.end()) continue;
                double cap = config.matched_count == MatchedCountMode::Original ? e.original
                                                                                : e.current;
                num += std::min(it->second, cap);
            }
        }
        if (num <= 0.0) {
            any_zero = true;
            break;
        }
        log_sum += std::log(num / denom);
    }

    if (any_zero || active == 0) return 0.0;
    double factor = config.average_over == AverageOver::FixedFour ? 0.25
                                                                  : 1.0 / static_cast<double>(active);
    return std::exp(factor * log_sum);
}

}  // namespace icsel
