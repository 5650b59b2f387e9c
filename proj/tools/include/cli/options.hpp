#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace icsel::cli {

// Either a line-aligned source/target file pair or one structured file.
struct CorpusInputs {
    std::string source_path;
    std::string target_path;
    std::string jsonl_path;
};

struct FilterFlags {
    int max_tokens = 250;
    double max_length_ratio = 1.5;
    bool normalize_punctuation = true;
    bool dedup = false;
};

struct BackendFlags {
    std::string kind = "echo";  // echo | copy-target | lexicon | http
    std::string endpoint;
    std::string lexicon_path;
    int timeout_seconds = 120;
};

struct CommonOptions {
    std::string out_dir;
    std::uint64_t seed = 42;
    bool lowercase = false;
    unsigned threads = 4;
};

struct BuildIndexOptions {
    CommonOptions common;
    CorpusInputs datastore;
    FilterFlags filter;
    double k1 = 1.2;
    double b = 0.75;
    std::string index_out;  // empty means <out_dir>/index.bin
};

struct RetrieveRerankOptions {
    CommonOptions common;
    std::string index_path;
    CorpusInputs datastore;  // same files and filter flags as the index build
    FilterFlags filter;
    std::string test_source_path;
    int top_k = 100;
    double lambda = 0.1;
    double threshold = 1.0;
    int q_max = 16;
    int min_order = 1;
    int max_order = 4;
    std::string matched_count = "original";      // original | current
    std::string average_over = "active_orders";  // active_orders | fixed_four
};

struct SelectTaskPromptOptions {
    CommonOptions common;
    CorpusInputs train;
    FilterFlags filter;
    CorpusInputs dev;
    std::size_t pool_size = 100;
    std::size_t dev_limit = 0;
    int max_new_tokens = 256;
    int retries = 2;
    unsigned concurrency = 1;
    BackendFlags backend;
};

struct TranslateEvalOptions {
    CommonOptions common;
    CorpusInputs datastore;
    FilterFlags filter;
    std::string test_source_path;
    std::string test_target_path;
    std::string selection_path;
    std::string task_ranking_path;  // required when task_count > 0
    int task_count = 0;
    int q_max = 16;
    std::string order_policy = "most_similar_left";
    int token_budget = 3096;
    int max_new_tokens = 256;
    BackendFlags backend;
};

struct AblateOptions {
    CommonOptions common;
    CorpusInputs datastore;
    FilterFlags filter;
    std::string test_source_path;
    std::string test_target_path;
    std::vector<double> sizes = {0.25, 0.5, 1.0};  // fractions of the datastore
    std::vector<int> q_grid = {1, 16};
    int top_k = 100;
    double lambda = 0.1;
    double threshold = 1.0;
    int min_order = 1;
    int max_order = 4;
    std::string matched_count = "original";
    std::string average_over = "active_orders";
    std::string order_policy = "most_similar_left";
    int token_budget = 3096;
    int max_new_tokens = 256;
    BackendFlags backend{"copy-target", "", "", 120};
};

}  // namespace icsel::cli
