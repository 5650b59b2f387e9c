#include "icsel/rerank.hpp"

#include <algorithm>
#include <cmath>

#include "icsel/errors.hpp"

namespace icsel {

namespace {

// Two candidates whose scores differ by less than this are tied; the one
// with the better retrieval rank wins.
constexpr double kTieEpsilon = 1e-12;

}  // namespace

const char* to_string(StopReason reason) {
    switch (reason) {
        case StopReason::Threshold: return "threshold";
        case StopReason::QMax: return "q_max";
        case StopReason::PoolExhausted: return "pool_exhausted";
    }
    return "pool_exhausted";
}

RerankedSelection rerank(std::span<const std::string> source_tokens,
                         std::span<const CandidateView> pool, const RerankConfig& config) {
    if (config.q_max < 1) throw ContractError("selection limit must be at least 1");
    if (config.lambda < 0.0 || config.lambda > 1.0) {
        throw ContractError("decay factor must lie in [0, 1]");
    }
    if (config.threshold <= 0.0) throw ContractError("stop threshold must be positive");
    if (source_tokens.empty()) throw ContractError("source must be non-empty");

    RerankedSelection result;
    SourceCoverageState state(source_tokens, config.ngram);

    struct Remaining {
        const CandidateView* view;
        NGramMultiset grams;
        bool taken = false;
    };
    std::vector<Remaining> remaining;
    remaining.reserve(pool.size());
    for (const auto& cand : pool) {
        remaining.push_back(
            Remaining{&cand, extract_word_ngrams_with_counts(cand.tokens, config.ngram), false});
    }
    // Scan in retrieval-rank order so a scoring tie resolves to the best rank
    // no matter how the caller ordered the pool.
    std::stable_sort(remaining.begin(), remaining.end(), [](const Remaining& a, const Remaining& b) {
        return a.view->rank < b.view->rank;
    });

    std::size_t left = remaining.size();
    while (true) {
        if (left == 0) {
            result.stopped_by = StopReason::PoolExhausted;
            break;
        }

        ++result.iterations;
        double best_score = 0.0;
        Remaining* best = nullptr;
        for (auto& r : remaining) {
            if (r.taken) continue;
            double score = state.overlap_score(r.grams, config.score);
            // The scan runs best-rank first, so only a real improvement may
            // displace the incumbent; a tie keeps the earlier candidate.
            if (best == nullptr || score > best_score + kTieEpsilon) {
                best_score = score;
                best = &r;
            }
        }

        if (best_score < config.threshold) {
            result.stopped_by = StopReason::Threshold;
            break;
        }

        result.selected.push_back(
            SelectedCandidate{best->view->id, best->view->rank, best_score, result.iterations});
        best->taken = true;
        --left;
        state.downweight(state.matched_grams(best->grams), config.lambda);
        // Selected content must not score again, so drop its grams entirely.
        for (auto& counts : best->grams.orders) counts.clear();

        if (static_cast<int>(result.selected.size()) >= config.q_max) {
            result.stopped_by = StopReason::QMax;
            break;
        }
    }
    return result;
}

CoverageReport coverage_report(std::span<const std::string> source_tokens,
                               std::span<const CandidateView> selected,
                               const NGramConfig& config) {
    auto source = extract_word_ngrams_with_counts(source_tokens, config);

    // Union of the selected candidates' grams, counts as element-wise maxima.
    NGramMultiset unioned;
    unioned.min_order = config.min_order;
    unioned.orders.resize(static_cast<std::size_t>(config.max_order - config.min_order + 1));
    for (const auto& cand : selected) {
        auto grams = extract_word_ngrams_with_counts(cand.tokens, config);
        for (int order = config.min_order; order <= config.max_order; ++order) {
            auto& u = unioned.at_order(order);
            for (const auto& [gram, count] : grams.at_order(order)) {
                auto it = u.find(gram);
                if (it == u.end()) {
                    u.emplace(gram, count);
                } else {
                    it->second = std::max(it->second, count);
                }
            }
        }
    }

    CoverageReport report;
    for (int order = config.min_order; order <= config.max_order; ++order) {
        const auto& src = source.at_order(order);
        double total = 0.0;
        double covered = 0.0;
        for (const auto& [gram, count] : src) {
            total += count;
            const auto& u = unioned.at_order(order);
            auto it = u.find(gram);
            if (it != u.end()) covered += std::min(count, it->second);
        }
        if (total <= 0.0) continue;  // source too short for this order
        report.orders.push_back(order);
        report.covered_fraction.push_back(covered / total);
    }
    return report;
}

}  // namespace icsel
