#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace icsel {

// BLEU over orders 1..4. `precisions` are plain fractions in [0, 1];
// `score` is scaled to [0, 100].
struct BleuScore {
    double score = 0.0;
    std::array<double, 4> precisions{0.0, 0.0, 0.0, 0.0};
    double brevity_penalty = 1.0;
    long hyp_length = 0;
    long ref_length = 0;
    bool smoothed = false;
};

// Corpus-level BLEU, no smoothing. Clipped n-gram matches and lengths are
// pooled over all sentence pairs before the precisions are formed. A zero
// precision at any order zeroes the score, as does an empty hypothesis set.
BleuScore corpus_bleu(std::span<const std::vector<std::string>> hypotheses,
                      std::span<const std::vector<std::string>> references);

// Single-pair BLEU with add-one smoothing: an order above 1 with zero
// matches scores (m + 1) / (t + 1) instead, and `smoothed` is set.
BleuScore sentence_bleu(std::span<const std::string> hypothesis,
                        std::span<const std::string> reference);

// Pearson correlation. Fewer than two points or a zero-variance side is a
// contract violation; callers who can meet those inputs must guard first.
double pearson_correlation(std::span<const double> xs, std::span<const double> ys);

// Clips generated text to twice the source length. Within budget the text
// passes through untouched; over budget the kept tokens are space-joined.
std::string truncate_output(const std::string& text, std::size_t source_token_count);

// Sentence-level BLEU of each hypothesis against its reference.
std::vector<double> sentence_bleu_vector(std::span<const std::vector<std::string>> hypotheses,
                                         std::span<const std::vector<std::string>> references);

// Diagnostic bundle relating prompt-example overlap to output quality.
// Per test sentence i: source_overlap[i] is sentence BLEU of the prompt's
// concatenated example sources against the test source; target_overlap[i]
// is the same on the target side; output_quality[i] is sentence BLEU of the
// system output against the reference. Correlations in [-1, 1].
struct OverlapStats {
    std::vector<double> source_overlap;
    std::vector<double> target_overlap;
    std::vector<double> output_quality;
    double avg_bleu_src = 0.0;
    double avg_bleu_tgt = 0.0;
    double corr_src = 0.0;  // Pearson(output_quality, source_overlap)
    double corr_tgt = 0.0;  // Pearson(output_quality, target_overlap)
};

// `prompt_sources[i]` / `prompt_targets[i]` are the tokens of test sentence
// i's prompt examples concatenated in render order. Throws if a correlation
// is undefined (fewer than two sentences, or a constant overlap vector).
OverlapStats overlap_stats(std::span<const std::vector<std::string>> prompt_sources,
                           std::span<const std::vector<std::string>> test_sources,
                           std::span<const std::vector<std::string>> prompt_targets,
                           std::span<const std::vector<std::string>> references,
                           std::span<const std::vector<std::string>> outputs);

}  // namespace icsel
