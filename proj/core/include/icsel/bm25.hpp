#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "icsel/corpus.hpp"

namespace icsel {

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

struct RetrievalHit {
    std::int64_t id = 0;   // example id in the indexed corpus
    double score = 0.0;
    int rank = 0;          // 1-based position in the returned list
};

// Inverted index over the source side of a corpus. Documents are addressed
// by their corpus example ids; postings use dense internal ordinals.
class Bm25Index {
public:
    Bm25Index() = default;

    static Bm25Index build(const Corpus& corpus, const Bm25Params& params = {});

    // Binary round trip. Files embed the corpus fingerprint so a stale index
    // is rejected at load time instead of silently mismatching ids.
    void save(const std::string& path) const;
    static Bm25Index load(const std::string& path);

    std::vector<RetrievalHit> retrieve(std::span<const std::string> query_tokens,
                                       int top_k = 100) const;

    std::size_t doc_count() const { return doc_ids_.size(); }
    double avg_doc_length() const { return avg_doc_length_; }
    const Bm25Params& params() const { return params_; }
    std::uint64_t corpus_fingerprint() const { return fingerprint_; }

    double idf(const std::string& term) const;

private:
    struct Posting {
        std::uint32_t ordinal = 0;
        std::uint32_t tf = 0;
    };

    Bm25Params params_;
    std::uint64_t fingerprint_ = 0;
    std::vector<std::int64_t> doc_ids_;       // ordinal -> example id
    std::vector<std::uint32_t> doc_lengths_;  // ordinal -> source token count
    double avg_doc_length_ = 0.0;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
};

}  // namespace icsel
