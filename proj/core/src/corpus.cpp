#include "icsel/corpus.hpp"

#include <cctype>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "icsel/errors.hpp"
#include "json.hpp"

namespace icsel {

std::string to_string(CorpusRole role) {
    switch (role) {
        case CorpusRole::Datastore: return "datastore";
        case CorpusRole::Dev: return "dev";
        case CorpusRole::Test: return "test";
    }
    return "datastore";
}

CorpusRole parse_corpus_role(std::string_view text) {
    if (text == "datastore" || text == "train") return CorpusRole::Datastore;
    if (text == "dev") return CorpusRole::Dev;
    if (text == "test") return CorpusRole::Test;
    throw ContractError("unknown corpus role: " + std::string(text));
}

namespace {

bool is_ascii_punct(unsigned char c) {
    return c < 0x80 && std::ispunct(c) != 0;
}

bool is_space_byte(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
}

void push_token(std::vector<std::string>& out, std::string token, bool lowercase) {
    if (token.empty()) return;
    if (lowercase) {
        for (auto& c : token) {
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
    }
    out.push_back(std::move(token));
}

void split_chunk(std::vector<std::string>& out, std::string_view chunk, bool lowercase) {
    std::size_t begin = 0;
    std::size_t end = chunk.size();

    // Leading punctuation, one token per character.
    while (begin < end && is_ascii_punct(static_cast<unsigned char>(chunk[begin]))) {
        push_token(out, std::string(1, chunk[begin]), lowercase);
        ++begin;
    }
    // Trailing punctuation is collected, then emitted after the core.
    std::size_t tail = end;
    while (tail > begin && is_ascii_punct(static_cast<unsigned char>(chunk[tail - 1]))) {
        --tail;
    }
    if (tail > begin) {
        push_token(out, std::string(chunk.substr(begin, tail - begin)), lowercase);
    }
    for (std::size_t i = tail; i < end; ++i) {
        push_token(out, std::string(1, chunk[i]), lowercase);
    }
}

// Decodes one UTF-8 codepoint starting at position i. Returns its length in
// bytes (1 on malformed input, which is passed through untouched).
std::size_t decode_utf8(std::string_view text, std::size_t i, char32_t& cp) {
    unsigned char b0 = static_cast<unsigned char>(text[i]);
    if (b0 < 0x80) {
        cp = b0;
        return 1;
    }
    std::size_t len = 0;
    if ((b0 & 0xE0) == 0xC0) { len = 2; cp = b0 & 0x1F; }
    else if ((b0 & 0xF0) == 0xE0) { len = 3; cp = b0 & 0x0F; }
    else if ((b0 & 0xF8) == 0xF0) { len = 4; cp = b0 & 0x07; }
    else { cp = b0; return 1; }
    if (i + len > text.size()) { cp = b0; return 1; }
    for (std::size_t k = 1; k < len; ++k) {
        unsigned char b = static_cast<unsigned char>(text[i + k]);
        if ((b & 0xC0) != 0x80) { cp = b0; return 1; }
        cp = (cp << 6) | (b & 0x3F);
    }
    return len;
}

// Canonical replacement for a single codepoint, or nullptr to keep it.
// This table is the published normalization map.
const char* punct_replacement(char32_t cp) {
    switch (cp) {
        // double quotes
        case 0x201C: case 0x201D: case 0x201E: case 0x201F:
        case 0x00AB: case 0x00BB:
            return "\"";
        // single quotes and acute accent used as one
        case 0x2018: case 0x2019: case 0x201A: case 0x201B:
        case 0x2039: case 0x203A: case 0x00B4: case 0x0060:
            return "'";
        // dashes and the minus sign
        case 0x2010: case 0x2011: case 0x2012: case 0x2013:
        case 0x2014: case 0x2015: case 0x2212:
            return "-";
        // ellipsis
        case 0x2026:
            return "...";
        // space variants
        case 0x00A0: case 0x2002: case 0x2003: case 0x2004: case 0x2005:
        case 0x2006: case 0x2007: case 0x2008: case 0x2009: case 0x200A:
        case 0x202F: case 0x205F: case 0x3000:
            return " ";
        // zero-width space and BOM are dropped
        case 0x200B: case 0xFEFF:
            return "";
        default:
            return nullptr;
    }
}

void append_codepoint(std::string& out, std::string_view text, std::size_t i, std::size_t len) {
    out.append(text.substr(i, len));
}

std::string strip_bom(std::string line) {
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
        line.erase(0, 3);
    }
    return line;
}

ParallelExample make_example(std::int64_t id, std::string source, std::string target,
                             const TokenizerConfig& tokenizer) {
    ParallelExample ex;
    ex.id = id;
    ex.source = std::move(source);
    ex.target = std::move(target);
    ex.source_tokens = tokenize(ex.source, tokenizer);
    ex.target_tokens = tokenize(ex.target, tokenizer);
    return ex;
}

}  // namespace

std::vector<std::string> read_text_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (first) {
            line = strip_bom(std::move(line));
            first = false;
        }
        lines.push_back(std::move(line));
    }
    if (in.bad()) throw IoError("read failure on file: " + path);
    return lines;
}

std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        while (i < n && is_space_byte(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < n && !is_space_byte(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) split_chunk(tokens, text.substr(start, i - start), config.lowercase);
    }
    return tokens;
}

std::string normalize_text(std::string_view text, bool normalize_punctuation) {
    std::string mapped;
    mapped.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        char32_t cp = 0;
        std::size_t len = decode_utf8(text, i, cp);
        const char* repl = normalize_punctuation ? punct_replacement(cp) : nullptr;
        if (repl) {
            mapped.append(repl);
        } else {
            append_codepoint(mapped, text, i, len);
        }
        i += len;
    }

    std::string out;
    out.reserve(mapped.size());
    bool pending_space = false;
    for (char c : mapped) {
        if (is_space_byte(static_cast<unsigned char>(c))) {
            pending_space = true;
            continue;
        }
        if (pending_space && !out.empty()) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

Corpus load_parallel_corpus(const std::string& source_path, const std::string& target_path,
                            CorpusRole role, const std::string& name,
                            const TokenizerConfig& tokenizer) {
    auto src_lines = read_text_lines(source_path);
    auto tgt_lines = read_text_lines(target_path);
    if (src_lines.size() != tgt_lines.size()) {
        throw ContractError("aligned corpus line counts differ: " +
                            std::to_string(src_lines.size()) + " vs " +
                            std::to_string(tgt_lines.size()) + " (" + source_path + ", " +
                            target_path + ")");
    }
    Corpus corpus;
    corpus.name = name.empty() ? source_path : name;
    corpus.role = role;
    corpus.examples.reserve(src_lines.size());
    for (std::size_t i = 0; i < src_lines.size(); ++i) {
        corpus.examples.push_back(make_example(static_cast<std::int64_t>(i),
                                               std::move(src_lines[i]), std::move(tgt_lines[i]),
                                               tokenizer));
    }
    return corpus;
}

Corpus load_jsonl_corpus(const std::string& path, CorpusRole role, const std::string& name,
                         const TokenizerConfig& tokenizer) {
    auto lines = read_text_lines(path);
    Corpus corpus;
    corpus.name = name.empty() ? path : name;
    corpus.role = role;
    corpus.examples.reserve(lines.size());
    std::unordered_set<std::int64_t> seen;
    std::int64_t next_id = 0;
    for (std::size_t lineno = 0; lineno < lines.size(); ++lineno) {
        if (lines[lineno].empty()) continue;
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(lines[lineno]);
        } catch (const nlohmann::json::exception& e) {
            throw ContractError(path + ":" + std::to_string(lineno + 1) +
                                ": invalid record: " + e.what());
        }
        if (!record.contains("source") || !record.contains("target")) {
            throw ContractError(path + ":" + std::to_string(lineno + 1) +
                                ": record needs source and target fields");
        }
        std::int64_t id = record.contains("id") ? record.at("id").get<std::int64_t>() : next_id;
        next_id = std::max(next_id, id + 1);
        if (!seen.insert(id).second) {
            throw ContractError(path + ": duplicate example id " + std::to_string(id));
        }
        corpus.examples.push_back(make_example(id, record.at("source").get<std::string>(),
                                               record.at("target").get<std::string>(), tokenizer));
    }
    return corpus;
}

Corpus normalize_and_filter(const Corpus& corpus, const FilterConfig& filter,
                            const TokenizerConfig& tokenizer) {
    Corpus out;
    out.name = corpus.name;
    out.role = corpus.role;
    out.examples.reserve(corpus.size());
    for (const auto& ex : corpus.examples) {
        std::string src = normalize_text(ex.source, filter.normalize_punctuation);
        std::string tgt = normalize_text(ex.target, filter.normalize_punctuation);
        if (src.empty() || tgt.empty()) continue;
        auto candidate = make_example(ex.id, std::move(src), std::move(tgt), tokenizer);
        auto len_s = static_cast<double>(candidate.source_tokens.size());
        auto len_t = static_cast<double>(candidate.target_tokens.size());
        if (len_s == 0 || len_t == 0) continue;
        if (len_s > filter.max_tokens || len_t > filter.max_tokens) continue;
        // Symmetric ratio; the boundary itself is kept.
        if (std::max(len_s, len_t) / std::min(len_s, len_t) > filter.max_length_ratio) continue;
        out.examples.push_back(std::move(candidate));
    }
    return out;
}

Corpus dedup_exact(const Corpus& corpus) {
    Corpus out;
    out.name = corpus.name;
    out.role = corpus.role;
    out.examples.reserve(corpus.size());
    std::unordered_set<std::string> seen;
    for (const auto& ex : corpus.examples) {
        std::string key = ex.source + '\x1e' + ex.target;
        if (seen.insert(std::move(key)).second) out.examples.push_back(ex);
    }
    return out;
}

std::uint64_t corpus_fingerprint(const Corpus& corpus) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a offset basis
    auto mix_byte = [&h](unsigned char b) {
        h ^= b;
        h *= 1099511628211ull;
    };
    auto mix_str = [&](const std::string& s) {
        for (unsigned char c : s) mix_byte(c);
        mix_byte(0x1f);
    };
    auto mix_u64 = [&](std::uint64_t v) {
        for (int k = 0; k < 8; ++k) mix_byte(static_cast<unsigned char>(v >> (8 * k)));
    };
    mix_u64(corpus.size());
    for (const auto& ex : corpus.examples) {
        mix_u64(static_cast<std::uint64_t>(ex.id));
        for (const auto& t : ex.source_tokens) mix_str(t);
        mix_byte(0x1e);
        for (const auto& t : ex.target_tokens) mix_str(t);
        mix_byte(0x1d);
    }
    return h;
}

}  // namespace icsel
