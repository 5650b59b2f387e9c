#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "icsel/corpus.hpp"

namespace bench {

// Mildly skewed word distribution so posting lists have realistic shape:
// a handful of frequent terms, a long tail of rare ones.
class WordSampler {
public:
    WordSampler(int vocab, std::uint64_t seed) : rng_(seed), cumulative_(vocab) {
        double total = 0.0;
        for (int r = 0; r < vocab; ++r) {
            total += 1.0 / (r + 10.0);
            cumulative_[r] = total;
        }
        unit_ = std::uniform_real_distribution<double>(0.0, total);
    }

    std::string next() {
        auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), unit_(rng_));
        return "w" + std::to_string(it - cumulative_.begin());
    }

    std::vector<std::string> sentence(int min_len, int max_len) {
        std::uniform_int_distribution<int> len(min_len, max_len);
        std::vector<std::string> tokens(len(rng_));
        for (auto& token : tokens) token = next();
        return tokens;
    }

private:
    std::mt19937_64 rng_;
    std::vector<double> cumulative_;
    std::uniform_real_distribution<double> unit_;
};

inline icsel::Corpus make_corpus(int n_docs, int vocab, std::uint64_t seed) {
    WordSampler sampler(vocab, seed);
    icsel::Corpus corpus;
    corpus.role = icsel::CorpusRole::Datastore;
    corpus.examples.reserve(n_docs);
    for (int i = 0; i < n_docs; ++i) {
        icsel::ParallelExample example;
        example.id = i;
        example.source_tokens = sampler.sentence(5, 20);
        example.target_tokens = example.source_tokens;
        corpus.examples.push_back(std::move(example));
    }
    return corpus;
}

}  // namespace bench
