#include "icsel/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "icsel/corpus.hpp"
#include "icsel/errors.hpp"
#include "icsel/ngram.hpp"

namespace icsel {

namespace {

constexpr int kMaxOrder = 4;

struct MatchTotals {
    std::array<double, kMaxOrder> matched{};  // clipped matches per order
    std::array<double, kMaxOrder> total{};    // hypothesis grams per order
    long hyp_length = 0;
    long ref_length = 0;
};

void accumulate_pair(MatchTotals& acc, std::span<const std::string> hyp,
                     std::span<const std::string> ref) {
    acc.hyp_length += static_cast<long>(hyp.size());
    acc.ref_length += static_cast<long>(ref.size());
    NGramConfig config{1, kMaxOrder};
    auto hyp_grams = extract_word_ngrams_with_counts(hyp, config);
    auto ref_grams = extract_word_ngrams_with_counts(ref, config);
    for (int order = 1; order <= kMaxOrder; ++order) {
        const auto& h = hyp_grams.at_order(order);
        const auto& r = ref_grams.at_order(order);
        for (const auto& [gram, count] : h) {
            acc.total[order - 1] += count;
            auto it = r.find(gram);
            if (it != r.end()) acc.matched[order - 1] += std::min(count, it->second);
        }
    }
}

BleuScore finish(const MatchTotals& acc, bool smooth) {
    BleuScore out;
    out.hyp_length = acc.hyp_length;
    out.ref_length = acc.ref_length;
    if (acc.hyp_length == 0) return out;

    double log_sum = 0.0;
    for (int order = 1; order <= kMaxOrder; ++order) {
        double m = acc.matched[order - 1];
        double t = acc.total[order - 1];
        double p;
        if (smooth && order > 1 && m == 0.0) {
            p = (m + 1.0) / (t + 1.0);
            out.smoothed = true;
        } else {
            p = t > 0.0 ? m / t : 0.0;
        }
        out.precisions[order - 1] = p;
        if (p <= 0.0) return out;  // score stays 0
        log_sum += std::log(p);
    }

    out.brevity_penalty =
        acc.hyp_length < acc.ref_length
            ? std::exp(1.0 - static_cast<double>(acc.ref_length) /
                                 static_cast<double>(acc.hyp_length))
            : 1.0;
    out.score = 100.0 * out.brevity_penalty * std::exp(log_sum / kMaxOrder);
    return out;
}

}  // namespace

BleuScore corpus_bleu(std::span<const std::vector<std::string>> hypotheses,
                      std::span<const std::vector<std::string>> references) {
    if (hypotheses.size() != references.size()) {
        throw ContractError("hypothesis and reference counts differ: " +
                            std::to_string(hypotheses.size()) + " vs " +
                            std::to_string(references.size()));
    }
    MatchTotals acc;
    for (std::size_t i = 0; i < hypotheses.size(); ++i) {
        accumulate_pair(acc, hypotheses[i], references[i]);
    }
    return finish(acc, /*smooth=*/false);
}

BleuScore sentence_bleu(std::span<const std::string> hypothesis,
                        std::span<const std::string> reference) {
    MatchTotals acc;
    accumulate_pair(acc, hypothesis, reference);
    return finish(acc, /*smooth=*/true);
}

double pearson_correlation(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) {
        throw ContractError("correlation inputs differ in length");
    }
    if (xs.size() < 2) {
        throw ContractError("correlation needs at least two points");
    }
    double n = static_cast<double>(xs.size());
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mean_x += xs[i];
        mean_y += ys[i];
    }
    mean_x /= n;
    mean_y /= n;

    double cov = 0.0, var_x = 0.0, var_y = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double dx = xs[i] - mean_x;
        double dy = ys[i] - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if (var_x == 0.0 || var_y == 0.0) {
        throw ContractError("correlation undefined for a constant sequence");
    }
    return cov / std::sqrt(var_x * var_y);
}

std::string truncate_output(const std::string& text, std::size_t source_token_count) {
    if (source_token_count < 1) {
        throw ContractError("truncation needs a positive source length");
    }
    auto tokens = tokenize(text);
    std::size_t limit = 2 * source_token_count;
    if (tokens.size() <= limit) return text;
    std::string out;
    for (std::size_t i = 0; i < limit; ++i) {
        if (i > 0) out.push_back(' ');
        out.append(tokens[i]);
    }
    return out;
}

std::vector<double> sentence_bleu_vector(std::span<const std::vector<std::string>> hypotheses,
                                         std::span<const std::vector<std::string>> references) {
    if (hypotheses.size() != references.size()) {
        throw ContractError("hypothesis and reference counts differ: " +
                            std::to_string(hypotheses.size()) + " vs " +
                            std::to_string(references.size()));
    }
    std::vector<double> out;
    out.reserve(hypotheses.size());
    for (std::size_t i = 0; i < hypotheses.size(); ++i) {
        out.push_back(sentence_bleu(hypotheses[i], references[i]).score);
    }
    return out;
}

OverlapStats overlap_stats(std::span<const std::vector<std::string>> prompt_sources,
                           std::span<const std::vector<std::string>> test_sources,
                           std::span<const std::vector<std::string>> prompt_targets,
                           std::span<const std::vector<std::string>> references,
                           std::span<const std::vector<std::string>> outputs) {
    std::size_t n = test_sources.size();
    if (prompt_sources.size() != n || prompt_targets.size() != n || references.size() != n ||
        outputs.size() != n) {
        throw ContractError("overlap inputs must be parallel");
    }
    OverlapStats stats;
    stats.source_overlap = sentence_bleu_vector(prompt_sources, test_sources);
    stats.target_overlap = sentence_bleu_vector(prompt_targets, references);
    stats.output_quality = sentence_bleu_vector(outputs, references);
    auto mean = [](const std::vector<double>& v) {
        double sum = 0.0;
        for (double x : v) sum += x;
        return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
    };
    stats.avg_bleu_src = mean(stats.source_overlap);
    stats.avg_bleu_tgt = mean(stats.target_overlap);
    stats.corr_src = pearson_correlation(stats.output_quality, stats.source_overlap);
    stats.corr_tgt = pearson_correlation(stats.output_quality, stats.target_overlap);
    return stats;
}

}  // namespace icsel
