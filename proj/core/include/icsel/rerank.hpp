#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "icsel/ngram.hpp"

namespace icsel {

// One candidate as the reranker sees it. `rank` is the 1-based position in
// the retrieval list and is the tiebreaker when scores are equal.
struct CandidateView {
    std::int64_t id = 0;
    int rank = 0;
    std::span<const std::string> tokens;
};

// Invariants: 0 <= lambda <= 1, threshold > 0, q_max >= 1.
struct RerankConfig {
    double lambda = 0.1;      // decay applied to covered source grams
    double threshold = 1.0;   // stop once the best score drops below this
    int q_max = 16;           // at most this many selections
    NGramConfig ngram;
    ScoreConfig score;
};

enum class StopReason { Threshold, QMax, PoolExhausted };

struct SelectedCandidate {
    std::int64_t id = 0;
    int rank = 0;        // retrieval rank the candidate came in with
    double score = 0.0;  // overlap score at the moment of selection
    int iteration = 0;   // 1-based scoring round that picked it
};

struct RerankedSelection {
    std::vector<SelectedCandidate> selected;  // in selection order
    StopReason stopped_by = StopReason::PoolExhausted;
    int iterations = 0;  // scoring rounds performed, including the stopping one
};

const char* to_string(StopReason reason);

// Greedy coverage-driven selection. Each round scores every remaining
// candidate against the live source state, stops if the best falls below
// config.threshold, otherwise takes the best (ties to the lowest retrieval
// rank), zeroes that candidate out, and decays the source grams it covered.
// The source must be non-empty; an empty pool is fine.
RerankedSelection rerank(std::span<const std::string> source_tokens,
                         std::span<const CandidateView> pool, const RerankConfig& config = {});

// Per-order fraction of the source's n-gram mass covered by the union of the
// selected candidates' n-grams. Union counts are element-wise maxima.
struct CoverageReport {
    std::vector<int> orders;
    std::vector<double> covered_fraction;  // parallel to orders
};

CoverageReport coverage_report(std::span<const std::string> source_tokens,
                               std::span<const CandidateView> selected,
                               const NGramConfig& config = {});

}  // namespace icsel
