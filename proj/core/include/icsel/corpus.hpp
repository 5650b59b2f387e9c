#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace icsel {

enum class CorpusRole { Datastore, Dev, Test };

std::string to_string(CorpusRole role);
CorpusRole parse_corpus_role(std::string_view text);

struct TokenizerConfig {
    bool lowercase = false;  // ASCII case folding only
};

/// One aligned sentence pair. Token fields are always derived from the text
/// fields with the tokenizer the pair was built with.
struct ParallelExample {
    std::int64_t id = 0;
    std::string source;
    std::string target;
    std::vector<std::string> source_tokens;
    std::vector<std::string> target_tokens;
};

struct Corpus {
    std::string name;
    CorpusRole role = CorpusRole::Datastore;
    std::vector<ParallelExample> examples;

    std::size_t size() const { return examples.size(); }
    bool empty() const { return examples.empty(); }
};

struct FilterConfig {
    static constexpr int kNoTokenLimit = INT32_MAX;
    static constexpr double kNoRatioLimit = 1e308;

    int max_tokens = 250;
    double max_length_ratio = 1.5;
    bool normalize_punctuation = true;
};

/// Whitespace tokenizer that peels leading/trailing ASCII punctuation off
/// each chunk into separate tokens. Interior punctuation (hyphens,
/// apostrophes, decimal points) is left alone. Deterministic; never fails.
///
///   "Welche Risiken?"  ->  ["Welche", "Risiken", "?"]
std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config = {});

// Whole file as lines. Strips a UTF-8 BOM and trailing carriage returns.
std::vector<std::string> read_text_lines(const std::string& path);

/// Canonicalizes text: maps the documented set of Unicode quotes, dashes,
/// spaces and the ellipsis to their ASCII forms (when normalize_punctuation
/// is set), collapses runs of whitespace to single spaces, and trims the
/// ends. Whitespace collapsing and trimming always happen.
std::string normalize_text(std::string_view text, bool normalize_punctuation = true);

/// Loads line-aligned source/target plain-text files. One example per line,
/// ids assigned sequentially from 0. Mismatched line counts raise a
/// ContractError naming both counts; unreadable files raise IoError.
Corpus load_parallel_corpus(const std::string& source_path, const std::string& target_path,
                            CorpusRole role, const std::string& name = "",
                            const TokenizerConfig& tokenizer = {});

/// Loads the single-file format: one JSON record per line with fields
/// {id?, source, target}. Records without an id get sequential ids.
/// Duplicate ids raise ContractError.
Corpus load_jsonl_corpus(const std::string& path, CorpusRole role, const std::string& name = "",
                         const TokenizerConfig& tokenizer = {});

/// Normalizes every pair and drops those that violate the filter: either
/// side longer than max_tokens, token-count ratio max/min strictly above
/// max_length_ratio, or either side empty after normalization. Survivor
/// order and ids are preserved. Idempotent.
Corpus normalize_and_filter(const Corpus& corpus, const FilterConfig& filter,
                            const TokenizerConfig& tokenizer = {});

/// Drops exact (source, target) duplicate pairs, keeping the first.
Corpus dedup_exact(const Corpus& corpus);

/// Order-sensitive 64-bit FNV-1a digest over ids and token sequences.
/// Identical corpora (same pairs, same tokenizer) always hash equal.
std::uint64_t corpus_fingerprint(const Corpus& corpus);

}  // namespace icsel
