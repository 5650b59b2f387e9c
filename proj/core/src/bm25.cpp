#include "icsel/bm25.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "icsel/errors.hpp"

namespace icsel {

namespace {

constexpr char kMagic[8] = {'I', 'C', 'S', 'E', 'L', 'I', 'D', 'X'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const std::string& path) {
    T value;
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw IntegrityError("truncated index file: " + path);
    return value;
}

void write_str(std::ostream& out, const std::string& s) {
    write_pod(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_str(std::istream& in, const std::string& path) {
    auto len = read_pod<std::uint32_t>(in, path);
    std::string s(len, '\0');
    in.read(s.data(), static_cast<std::streamsize>(len));
    if (!in) throw IntegrityError("truncated index file: " + path);
    return s;
}

}  // namespace

Bm25Index Bm25Index::build(const Corpus& corpus, const Bm25Params& params) {
    if (params.k1 < 0.0 || params.b < 0.0 || params.b > 1.0) {
        throw ContractError("bm25 parameters out of range: k1 >= 0 and 0 <= b <= 1 required");
    }
    if (corpus.empty()) throw ContractError("cannot index an empty corpus");
    if (corpus.role != CorpusRole::Datastore) {
        throw ContractError("only datastore corpora are indexable; got role " +
                            std::string(to_string(corpus.role)));
    }
    Bm25Index index;
    index.params_ = params;
    index.fingerprint_ = icsel::corpus_fingerprint(corpus);
    index.doc_ids_.reserve(corpus.size());
    index.doc_lengths_.reserve(corpus.size());

    std::uint64_t total_length = 0;
    std::unordered_map<std::string, std::uint32_t> tf;  // reused per document
    for (const auto& ex : corpus.examples) {
        auto ordinal = static_cast<std::uint32_t>(index.doc_ids_.size());
        index.doc_ids_.push_back(ex.id);
        index.doc_lengths_.push_back(static_cast<std::uint32_t>(ex.source_tokens.size()));
        total_length += ex.source_tokens.size();

        tf.clear();
        for (const auto& tok : ex.source_tokens) ++tf[tok];
        for (const auto& [term, count] : tf) {
            index.postings_[term].push_back(Posting{ordinal, count});
        }
    }
    index.avg_doc_length_ =
        corpus.empty() ? 0.0 : static_cast<double>(total_length) / static_cast<double>(corpus.size());
    return index;
}

double Bm25Index::idf(const std::string& term) const {
    auto it = postings_.find(term);
    double df = it == postings_.end() ? 0.0 : static_cast<double>(it->second.size());
    double n = static_cast<double>(doc_ids_.size());
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

std::vector<RetrievalHit> Bm25Index::retrieve(std::span<const std::string> query_tokens,
                                              int top_k) const {
    if (top_k < 1) throw ContractError("retrieval depth must be at least 1");
    std::vector<double> scores(doc_ids_.size(), 0.0);
    std::vector<std::uint32_t> touched;

    const double n = static_cast<double>(doc_ids_.size());
    // Each query occurrence contributes; a repeated term scores twice.
    for (const auto& term : query_tokens) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const auto& plist = it->second;
        double df = static_cast<double>(plist.size());
        double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        for (const auto& p : plist) {
            double tf = static_cast<double>(p.tf);
            double len_norm = 1.0 - params_.b +
                              params_.b * static_cast<double>(doc_lengths_[p.ordinal]) /
                                  avg_doc_length_;
            double contrib = idf * tf * (params_.k1 + 1.0) / (tf + params_.k1 * len_norm);
            if (scores[p.ordinal] == 0.0) touched.push_back(p.ordinal);
            scores[p.ordinal] += contrib;
        }
    }

    // Ties break toward the smaller example id so rankings are reproducible.
    std::sort(touched.begin(), touched.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return doc_ids_[a] < doc_ids_[b];
    });
    if (touched.size() > static_cast<std::size_t>(top_k)) {
        touched.resize(static_cast<std::size_t>(top_k));
    }

    std::vector<RetrievalHit> hits;
    hits.reserve(touched.size());
    for (std::size_t i = 0; i < touched.size(); ++i) {
        hits.push_back(RetrievalHit{doc_ids_[touched[i]], scores[touched[i]],
                                    static_cast<int>(i) + 1});
    }
    return hits;
}

void Bm25Index::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open index file for writing: " + path);

    out.write(kMagic, sizeof(kMagic));
    write_pod(out, kVersion);
    write_pod(out, params_.k1);
    write_pod(out, params_.b);
    write_pod(out, fingerprint_);
    write_pod(out, static_cast<std::uint64_t>(doc_ids_.size()));
    write_pod(out, avg_doc_length_);
    for (std::size_t i = 0; i < doc_ids_.size(); ++i) {
        write_pod(out, static_cast<std::uint64_t>(doc_ids_[i]));
        write_pod(out, doc_lengths_[i]);
    }

    // Sorted vocabulary makes the file bytes a function of the index content
    // alone, not of hash-map iteration order.
    std::vector<const std::string*> vocab;
    vocab.reserve(postings_.size());
    for (const auto& [term, plist] : postings_) vocab.push_back(&term);
    std::sort(vocab.begin(), vocab.end(),
              [](const std::string* a, const std::string* b) { return *a < *b; });

    write_pod(out, static_cast<std::uint64_t>(vocab.size()));
    for (const auto* term : vocab) {
        write_str(out, *term);
        const auto& plist = postings_.at(*term);
        write_pod(out, static_cast<std::uint64_t>(plist.size()));
        for (const auto& p : plist) {
            write_pod(out, p.ordinal);
            write_pod(out, p.tf);
        }
    }
    out.flush();
    if (!out) throw IoError("write failure on index file: " + path);
}

Bm25Index Bm25Index::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open index file: " + path);

    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw IntegrityError("not an index file: " + path);
    }
    auto version = read_pod<std::uint32_t>(in, path);
    if (version != kVersion) {
        throw IntegrityError("unsupported index version " + std::to_string(version) + ": " + path);
    }

    Bm25Index index;
    index.params_.k1 = read_pod<double>(in, path);
    index.params_.b = read_pod<double>(in, path);
    index.fingerprint_ = read_pod<std::uint64_t>(in, path);
    auto doc_count = read_pod<std::uint64_t>(in, path);
    index.avg_doc_length_ = read_pod<double>(in, path);
    index.doc_ids_.reserve(doc_count);
    index.doc_lengths_.reserve(doc_count);
    for (std::uint64_t i = 0; i < doc_count; ++i) {
        index.doc_ids_.push_back(static_cast<std::int64_t>(read_pod<std::uint64_t>(in, path)));
        index.doc_lengths_.push_back(read_pod<std::uint32_t>(in, path));
    }

    auto vocab_size = read_pod<std::uint64_t>(in, path);
    index.postings_.reserve(vocab_size);
    for (std::uint64_t v = 0; v < vocab_size; ++v) {
        std::string term = read_str(in, path);
        auto n_postings = read_pod<std::uint64_t>(in, path);
        auto& plist = index.postings_[std::move(term)];
        plist.reserve(n_postings);
        for (std::uint64_t p = 0; p < n_postings; ++p) {
            auto ordinal = read_pod<std::uint32_t>(in, path);
            auto tf = read_pod<std::uint32_t>(in, path);
            if (ordinal >= doc_count) {
                throw IntegrityError("posting references missing document: " + path);
            }
            plist.push_back(Posting{ordinal, tf});
        }
    }
    // A stray trailing byte means the writer and reader disagree.
    if (in.peek() != std::char_traits<char>::eof()) {
        throw IntegrityError("trailing bytes in index file: " + path);
    }
    return index;
}

}  // namespace icsel
