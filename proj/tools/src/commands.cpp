#include "cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <unordered_map>

#include "cli/dumps.hpp"
#include "icsel/backend.hpp"
#include "icsel/bm25.hpp"
#include "icsel/corpus.hpp"
#include "icsel/errors.hpp"
#include "icsel/metrics.hpp"
#include "icsel/parallel.hpp"
#include "icsel/prompting.hpp"
#include "icsel/rerank.hpp"
#include "json.hpp"

namespace icsel::cli {

namespace {

using IdMap = std::unordered_map<std::int64_t, std::size_t>;

TokenizerConfig tokenizer_config(const CommonOptions& common) {
    return TokenizerConfig{common.lowercase};
}

FilterConfig filter_config(const FilterFlags& flags) {
    FilterConfig config;
    config.max_tokens = flags.max_tokens;
    config.max_length_ratio = flags.max_length_ratio;
    config.normalize_punctuation = flags.normalize_punctuation;
    return config;
}

void ensure_out_dir(const std::string& out_dir) {
    if (out_dir.empty()) throw ContractError("--out-dir is required");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

Corpus load_input(const CorpusInputs& inputs, CorpusRole role, const TokenizerConfig& tok) {
    bool has_pair = !inputs.source_path.empty() || !inputs.target_path.empty();
    bool has_jsonl = !inputs.jsonl_path.empty();
    if (has_pair == has_jsonl) {
        throw ContractError("provide either a source/target file pair or one structured file");
    }
    if (has_jsonl) return load_jsonl_corpus(inputs.jsonl_path, role, "", tok);
    if (inputs.source_path.empty() || inputs.target_path.empty()) {
        throw ContractError("source and target files must be given together");
    }
    return load_parallel_corpus(inputs.source_path, inputs.target_path, role, "", tok);
}

// The datastore side gets the full cleaning treatment.
Corpus load_datastore(const CorpusInputs& inputs, const FilterFlags& flags,
                      const TokenizerConfig& tok) {
    auto corpus = load_input(inputs, CorpusRole::Datastore, tok);
    corpus = normalize_and_filter(corpus, filter_config(flags), tok);
    if (flags.dedup) corpus = dedup_exact(corpus);
    return corpus;
}

// Dev and test sides are normalized but never dropped, so line numbers keep
// lining up with their reference files.
Corpus normalize_pairs(Corpus corpus, bool normalize_punct, const TokenizerConfig& tok) {
    for (auto& ex : corpus.examples) {
        ex.source = normalize_text(ex.source, normalize_punct);
        ex.target = normalize_text(ex.target, normalize_punct);
        ex.source_tokens = tokenize(ex.source, tok);
        ex.target_tokens = tokenize(ex.target, tok);
    }
    return corpus;
}

std::vector<std::string> load_normalized_lines(const std::string& path, bool normalize_punct) {
    auto lines = read_text_lines(path);
    for (auto& line : lines) line = normalize_text(line, normalize_punct);
    return lines;
}

IdMap index_by_id(const Corpus& corpus) {
    IdMap map;
    map.reserve(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) map.emplace(corpus.examples[i].id, i);
    return map;
}

const ParallelExample& resolve_id(const Corpus& corpus, const IdMap& map, std::int64_t id,
                                  const char* what) {
    auto it = map.find(id);
    if (it == map.end()) {
        throw ContractError(std::string(what) + " references example id " + std::to_string(id) +
                            " which is not in the datastore");
    }
    return corpus.examples[it->second];
}

std::unordered_map<std::string, std::string> load_lexicon(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open lexicon file: " + path);
    nlohmann::json parsed;
    try {
        in >> parsed;
    } catch (const nlohmann::json::exception& e) {
        throw IntegrityError("malformed lexicon file " + path + ": " + e.what());
    }
    if (!parsed.is_object()) throw ContractError("lexicon file must hold one object of word pairs");
    std::unordered_map<std::string, std::string> lexicon;
    for (const auto& [word, translation] : parsed.items()) {
        if (!translation.is_string()) {
            throw ContractError("lexicon values must be strings (offending key: " + word + ")");
        }
        lexicon.emplace(word, translation.get<std::string>());
    }
    return lexicon;
}

std::unique_ptr<Backend> make_backend(const BackendFlags& flags) {
    if (flags.kind == "echo") return std::make_unique<EchoBackend>();
    if (flags.kind == "copy-target") return std::make_unique<CopyTargetBackend>();
    if (flags.kind == "lexicon") {
        if (flags.lexicon_path.empty()) throw ContractError("the lexicon backend needs --lexicon");
        return std::make_unique<LexiconBackend>(load_lexicon(flags.lexicon_path));
    }
    if (flags.kind == "http") {
        if (flags.endpoint.empty()) {
            throw ContractError("the http backend needs --endpoint (or ICSEL_ENDPOINT)");
        }
        return make_http_backend(HttpBackendConfig{flags.endpoint, flags.timeout_seconds});
    }
    throw ContractError("unknown backend kind: " + flags.kind);
}

MatchedCountMode parse_matched_count(const std::string& text) {
    if (text == "original") return MatchedCountMode::Original;
    if (text == "current") return MatchedCountMode::Current;
    throw ContractError("unknown matched-count mode: " + text);
}

AverageOver parse_average_over(const std::string& text) {
    if (text == "active_orders") return AverageOver::ActiveOrders;
    if (text == "fixed_four") return AverageOver::FixedFour;
    throw ContractError("unknown averaging mode: " + text);
}

RerankConfig make_rerank_config(double lambda, double threshold, int q_max, int min_order,
                                int max_order, const std::string& matched_count,
                                const std::string& average_over) {
    RerankConfig config;
    config.lambda = lambda;
    config.threshold = threshold;
    config.q_max = q_max;
    config.ngram = NGramConfig{min_order, max_order};
    config.score = ScoreConfig{parse_matched_count(matched_count), parse_average_over(average_over)};
    return config;
}

nlohmann::ordered_json to_json(const CorpusInputs& inputs) {
    if (!inputs.jsonl_path.empty()) return {{"jsonl", inputs.jsonl_path}};
    return {{"source", inputs.source_path}, {"target", inputs.target_path}};
}

nlohmann::ordered_json to_json(const FilterFlags& flags) {
    return {{"max_tokens", flags.max_tokens},
            {"max_length_ratio", flags.max_length_ratio},
            {"normalize_punctuation", flags.normalize_punctuation},
            {"dedup", flags.dedup}};
}

nlohmann::ordered_json to_json(const BackendFlags& flags) {
    nlohmann::ordered_json j{{"kind", flags.kind}};
    if (flags.kind == "http") {
        j["endpoint"] = flags.endpoint;
        j["timeout_seconds"] = flags.timeout_seconds;
    }
    if (flags.kind == "lexicon") j["lexicon"] = flags.lexicon_path;
    return j;
}

nlohmann::ordered_json common_json(const CommonOptions& common, const char* command) {
    return {{"command", command},
            {"seed", common.seed},
            {"lowercase", common.lowercase},
            {"threads", common.threads},
            {"out_dir", common.out_dir}};
}

// Retrieval plus greedy reranking plus coverage for one test source.
SelectionRecord select_for_source(std::int64_t test_index, const std::string& normalized_source,
                                  const TokenizerConfig& tok, const Bm25Index& index,
                                  const Corpus& datastore, const IdMap& map, int top_k,
                                  const RerankConfig& config) {
    auto tokens = tokenize(normalized_source, tok);
    if (tokens.empty()) {
        throw ContractError("test line " + std::to_string(test_index + 1) +
                            " is empty after normalization");
    }
    SelectionRecord record;
    record.test_index = test_index;
    record.source = normalized_source;
    record.bm25 = index.retrieve(tokens, top_k);

    std::vector<CandidateView> views;
    views.reserve(record.bm25.size());
    for (const auto& hit : record.bm25) {
        const auto& ex = resolve_id(datastore, map, hit.id, "index");
        views.push_back(CandidateView{hit.id, hit.rank, ex.source_tokens});
    }

    auto selection = rerank(tokens, views, config);
    record.selected = selection.selected;
    record.stopped_by = to_string(selection.stopped_by);

    std::vector<CandidateView> chosen;
    chosen.reserve(selection.selected.size());
    for (const auto& s : selection.selected) {
        const auto& ex = resolve_id(datastore, map, s.id, "selection");
        chosen.push_back(CandidateView{s.id, s.rank, ex.source_tokens});
    }
    record.coverage = coverage_report(tokens, chosen, config.ngram);
    return record;
}

double guarded_pearson(std::span<const double> xs, std::span<const double> ys, bool& defined) {
    try {
        double r = pearson_correlation(xs, ys);
        defined = true;
        return r;
    } catch (const ContractError&) {
        defined = false;
        return 0.0;
    }
}

nlohmann::ordered_json bleu_json(const BleuScore& bleu) {
    return {{"score", bleu.score},
            {"precisions", bleu.precisions},
            {"brevity_penalty", bleu.brevity_penalty},
            {"hyp_length", bleu.hyp_length},
            {"ref_length", bleu.ref_length},
            {"smoothed", bleu.smoothed}};
}

}  // namespace

void run_build_index(const BuildIndexOptions& options) {
    ensure_out_dir(options.common.out_dir);
    auto tok = tokenizer_config(options.common);
    auto corpus = load_datastore(options.datastore, options.filter, tok);
    auto index = Bm25Index::build(corpus, Bm25Params{options.k1, options.b});

    std::string index_path = options.index_out.empty()
                                 ? join_path(options.common.out_dir, "index.bin")
                                 : options.index_out;
    index.save(index_path);

    auto config = common_json(options.common, "build-index");
    config["datastore"] = to_json(options.datastore);
    config["filter"] = to_json(options.filter);
    config["bm25"] = {{"k1", options.k1}, {"b", options.b}};
    config["index_out"] = index_path;
    write_json_file(join_path(options.common.out_dir, "run_config.json"), config);

    std::cout << "indexed " << index.doc_count() << " examples, avg source length "
              << index.avg_doc_length() << "\n"
              << "index file: " << index_path << "\n";
}

void run_retrieve_rerank(const RetrieveRerankOptions& options) {
    ensure_out_dir(options.common.out_dir);
    auto tok = tokenizer_config(options.common);
    auto datastore = load_datastore(options.datastore, options.filter, tok);

    auto index = Bm25Index::load(options.index_path);
    if (index.corpus_fingerprint() != corpus_fingerprint(datastore)) {
        throw IntegrityError("index " + options.index_path +
                             " was not built from these inputs with these settings "
                             "(fingerprint mismatch)");
    }
    auto map = index_by_id(datastore);

    auto test_lines =
        load_normalized_lines(options.test_source_path, options.filter.normalize_punctuation);
    auto config =
        make_rerank_config(options.lambda, options.threshold, options.q_max, options.min_order,
                           options.max_order, options.matched_count, options.average_over);
    if (options.top_k < 1) throw ContractError("--top-k must be at least 1");

    std::vector<SelectionRecord> records(test_lines.size());
    parallel_for(test_lines.size(), options.common.threads, [&](std::size_t i) {
        records[i] = select_for_source(static_cast<std::int64_t>(i), test_lines[i], tok, index,
                                       datastore, map, options.top_k, config);
    });

    std::vector<nlohmann::ordered_json> dump;
    dump.reserve(records.size());
    double total_selected = 0.0;
    for (const auto& record : records) {
        total_selected += static_cast<double>(record.selected.size());
        dump.push_back(to_json(record));
    }
    write_jsonl(join_path(options.common.out_dir, "selection.jsonl"), dump);

    auto config_json = common_json(options.common, "retrieve-rerank");
    config_json["index"] = options.index_path;
    config_json["datastore"] = to_json(options.datastore);
    config_json["filter"] = to_json(options.filter);
    config_json["test_source"] = options.test_source_path;
    config_json["top_k"] = options.top_k;
    config_json["rerank"] = {{"lambda", options.lambda},
                             {"threshold", options.threshold},
                             {"q_max", options.q_max},
                             {"min_order", options.min_order},
                             {"max_order", options.max_order},
                             {"matched_count", options.matched_count},
                             {"average_over", options.average_over}};
    write_json_file(join_path(options.common.out_dir, "run_config.json"), config_json);

    double avg = records.empty() ? 0.0 : total_selected / static_cast<double>(records.size());
    std::cout << "processed " << records.size() << " test sources, avg selected " << avg << "\n"
              << "selection dump: " << join_path(options.common.out_dir, "selection.jsonl")
              << "\n";
}

void run_select_task_prompt(const SelectTaskPromptOptions& options) {
    ensure_out_dir(options.common.out_dir);
    auto tok = tokenizer_config(options.common);
    auto train = load_datastore(options.train, options.filter, tok);
    auto dev = normalize_pairs(load_input(options.dev, CorpusRole::Dev, tok),
                               options.filter.normalize_punctuation, tok);

    auto pool = sample_pool(train, options.pool_size, options.common.seed);
    auto backend = make_backend(options.backend);

    TaskSelectOptions select_options;
    select_options.dev_limit = options.dev_limit;
    select_options.max_new_tokens = options.max_new_tokens;
    select_options.concurrency = options.concurrency;
    select_options.retries = options.retries;
    select_options.tokenizer = tok;
    auto ranking = select_task_prompts(pool, dev, *backend, PromptTemplate{}, select_options);

    std::vector<nlohmann::ordered_json> dump;
    dump.reserve(ranking.ranked.size());
    for (std::size_t i = 0; i < ranking.ranked.size(); ++i) {
        dump.push_back(to_json(TaskRankingRecord{static_cast<int>(i) + 1, ranking.ranked[i].id,
                                                 ranking.ranked[i].dev_bleu}));
    }
    write_jsonl(join_path(options.common.out_dir, "task_ranking.jsonl"), dump);

    auto config = common_json(options.common, "select-task-prompt");
    config["train"] = to_json(options.train);
    config["filter"] = to_json(options.filter);
    config["dev"] = to_json(options.dev);
    config["pool_size"] = options.pool_size;
    config["dev_limit"] = options.dev_limit;
    config["max_new_tokens"] = options.max_new_tokens;
    config["retries"] = options.retries;
    config["concurrency"] = options.concurrency;
    config["backend"] = to_json(options.backend);
    write_json_file(join_path(options.common.out_dir, "run_config.json"), config);

    std::cout << "ranked " << ranking.ranked.size() << " pool examples; best id "
              << ranking.ranked.front().id << " with dev BLEU " << ranking.ranked.front().dev_bleu
              << "\n"
              << "ranking file: " << join_path(options.common.out_dir, "task_ranking.jsonl")
              << "\n";
}

void run_translate_eval(const TranslateEvalOptions& options) {
    ensure_out_dir(options.common.out_dir);
    auto tok = tokenizer_config(options.common);
    auto datastore = load_datastore(options.datastore, options.filter, tok);
    auto map = index_by_id(datastore);

    auto sources =
        load_normalized_lines(options.test_source_path, options.filter.normalize_punctuation);
    auto targets =
        load_normalized_lines(options.test_target_path, options.filter.normalize_punctuation);
    if (sources.size() != targets.size()) {
        throw ContractError("test source and target line counts differ: " +
                            std::to_string(sources.size()) + " vs " +
                            std::to_string(targets.size()));
    }
    if (sources.empty()) throw ContractError("test set is empty");

    auto raw_records = read_jsonl(options.selection_path);
    if (raw_records.size() != sources.size()) {
        throw ContractError("selection dump covers " + std::to_string(raw_records.size()) +
                            " sources but the test file has " + std::to_string(sources.size()));
    }
    std::vector<SelectionRecord> selections;
    selections.reserve(raw_records.size());
    for (std::size_t i = 0; i < raw_records.size(); ++i) {
        selections.push_back(selection_record_from_json(raw_records[i], options.selection_path));
        if (selections.back().test_index != static_cast<std::int64_t>(i)) {
            throw IntegrityError("selection dump is out of order at record " + std::to_string(i));
        }
        if (selections.back().source != sources[i]) {
            throw IntegrityError("selection dump does not match the test file at line " +
                                 std::to_string(i + 1) + "; rerun retrieve-rerank");
        }
    }

    if (options.task_count < 0) throw ContractError("--task-count must be non-negative");
    if (options.q_max < 0) throw ContractError("--q-max must be non-negative");
    if (options.task_count == 0 && options.q_max == 0) {
        throw ContractError("the prompt needs at least one example: task-count + q-max >= 1");
    }

    std::vector<ParallelExample> task_examples;
    if (options.task_count > 0) {
        if (options.task_ranking_path.empty()) {
            throw ContractError("--task-ranking is required when --task-count > 0");
        }
        auto ranking_records = read_jsonl(options.task_ranking_path);
        if (ranking_records.size() < static_cast<std::size_t>(options.task_count)) {
            throw ContractError("task ranking holds " + std::to_string(ranking_records.size()) +
                                " entries but --task-count is " +
                                std::to_string(options.task_count));
        }
        for (int i = 0; i < options.task_count; ++i) {
            auto record =
                task_ranking_record_from_json(ranking_records[i], options.task_ranking_path);
            task_examples.push_back(resolve_id(datastore, map, record.id, "task ranking"));
        }
    }

    PromptPlan plan;
    plan.task_count = options.task_count;
    plan.q_max = options.q_max;
    plan.order_policy = parse_order_policy(options.order_policy);
    plan.token_budget = options.token_budget;
    PromptTemplate tmpl;
    auto backend = make_backend(options.backend);

    struct Row {
        std::string output;
        double sentence = 0.0;
        int prompt_tokens = 0;
        std::vector<PromptExampleRef> examples;
        std::vector<std::string> out_tokens;
        std::vector<std::string> ref_tokens;
        double overlap_src = 0.0;
        double overlap_tgt = 0.0;
    };
    std::vector<Row> rows(sources.size());

    parallel_for(sources.size(), options.common.threads, [&](std::size_t i) {
        auto src_tokens = tokenize(sources[i], tok);
        if (src_tokens.empty()) {
            throw ContractError("test line " + std::to_string(i + 1) +
                                " is empty after normalization");
        }
        std::vector<ParallelExample> retrieved;
        std::size_t take = std::min(static_cast<std::size_t>(options.q_max),
                                    selections[i].selected.size());
        retrieved.reserve(take);
        for (std::size_t k = 0; k < take; ++k) {
            retrieved.push_back(resolve_id(datastore, map, selections[i].selected[k].id,
                                           "selection dump"));
        }

        auto prompt = assemble_prompt(task_examples, retrieved, sources[i], tmpl, plan);
        auto response =
            backend->generate(GenerationRequest{prompt.text, options.max_new_tokens, "\n"});
        std::string clipped = truncate_output(response.completion, src_tokens.size());

        Row row;
        row.output = clipped;
        row.prompt_tokens = prompt.token_count;
        row.examples = prompt.examples;
        row.out_tokens = tokenize(clipped, tok);
        row.ref_tokens = tokenize(targets[i], tok);
        row.sentence = sentence_bleu(row.out_tokens, row.ref_tokens).score;

        std::vector<std::string> prompt_src_tokens;
        std::vector<std::string> prompt_tgt_tokens;
        for (const auto& ref : prompt.examples) {
            const auto& ex = resolve_id(datastore, map, ref.id, "prompt");
            prompt_src_tokens.insert(prompt_src_tokens.end(), ex.source_tokens.begin(),
                                     ex.source_tokens.end());
            prompt_tgt_tokens.insert(prompt_tgt_tokens.end(), ex.target_tokens.begin(),
                                     ex.target_tokens.end());
        }
        row.overlap_src = sentence_bleu(prompt_src_tokens, src_tokens).score;
        row.overlap_tgt = sentence_bleu(prompt_tgt_tokens, row.ref_tokens).score;
        rows[i] = std::move(row);
    });

    std::vector<nlohmann::ordered_json> dump;
    dump.reserve(rows.size());
    std::vector<std::vector<std::string>> hyp_corpus, ref_corpus;
    hyp_corpus.reserve(rows.size());
    ref_corpus.reserve(rows.size());
    std::vector<double> xs, ys, outs;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        nlohmann::ordered_json j;
        j["test_index"] = i;
        j["source"] = sources[i];
        j["reference"] = targets[i];
        j["output"] = row.output;
        j["sentence_bleu"] = row.sentence;
        j["prompt_tokens"] = row.prompt_tokens;
        auto& examples = j["examples"] = nlohmann::ordered_json::array();
        for (const auto& ref : row.examples) {
            examples.push_back(
                {{"id", ref.id},
                 {"provenance",
                  ref.provenance == ExampleProvenance::TaskLevel ? "task_level" : "retrieved"}});
        }
        dump.push_back(std::move(j));
        hyp_corpus.push_back(row.out_tokens);
        ref_corpus.push_back(row.ref_tokens);
        xs.push_back(row.overlap_src);
        ys.push_back(row.overlap_tgt);
        outs.push_back(row.sentence);
    }
    write_jsonl(join_path(options.common.out_dir, "outputs.jsonl"), dump);

    auto bleu = corpus_bleu(hyp_corpus, ref_corpus);
    double avg_src = 0.0, avg_tgt = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        avg_src += xs[i];
        avg_tgt += ys[i];
    }
    avg_src /= static_cast<double>(xs.size());
    avg_tgt /= static_cast<double>(ys.size());
    bool src_defined = false, tgt_defined = false;
    double corr_src = guarded_pearson(outs, xs, src_defined);
    double corr_tgt = guarded_pearson(outs, ys, tgt_defined);

    nlohmann::ordered_json eval;
    eval["n_sentences"] = rows.size();
    eval["bleu"] = bleu_json(bleu);
    nlohmann::ordered_json overlap;
    overlap["avg_bleu_src"] = avg_src;
    overlap["avg_bleu_tgt"] = avg_tgt;
    overlap["corr_src"] = src_defined ? nlohmann::ordered_json(corr_src)
                                      : nlohmann::ordered_json(nullptr);
    overlap["corr_tgt"] = tgt_defined ? nlohmann::ordered_json(corr_tgt)
                                      : nlohmann::ordered_json(nullptr);
    overlap["n"] = rows.size();
    eval["overlap"] = overlap;
    write_json_file(join_path(options.common.out_dir, "eval.json"), eval);

    auto config = common_json(options.common, "translate-eval");
    config["datastore"] = to_json(options.datastore);
    config["filter"] = to_json(options.filter);
    config["test_source"] = options.test_source_path;
    config["test_target"] = options.test_target_path;
    config["selection"] = options.selection_path;
    config["task_ranking"] = options.task_ranking_path;
    config["plan"] = {{"task_count", options.task_count},
                      {"q_max", options.q_max},
                      {"order_policy", options.order_policy},
                      {"token_budget", options.token_budget}};
    config["max_new_tokens"] = options.max_new_tokens;
    config["backend"] = to_json(options.backend);
    write_json_file(join_path(options.common.out_dir, "run_config.json"), config);

    std::cout << "corpus BLEU " << bleu.score << " over " << rows.size() << " sentences\n"
              << "outputs: " << join_path(options.common.out_dir, "outputs.jsonl") << "\n";
}

void run_ablate_datastore(const AblateOptions& options) {
    ensure_out_dir(options.common.out_dir);
    auto tok = tokenizer_config(options.common);
    auto datastore = load_datastore(options.datastore, options.filter, tok);
    if (datastore.empty()) throw ContractError("datastore is empty after filtering");

    auto sources =
        load_normalized_lines(options.test_source_path, options.filter.normalize_punctuation);
    auto targets =
        load_normalized_lines(options.test_target_path, options.filter.normalize_punctuation);
    if (sources.size() != targets.size()) {
        throw ContractError("test source and target line counts differ: " +
                            std::to_string(sources.size()) + " vs " +
                            std::to_string(targets.size()));
    }
    if (sources.empty()) throw ContractError("test set is empty");

    std::vector<std::vector<std::string>> src_tokens(sources.size());
    std::vector<std::vector<std::string>> ref_tokens(sources.size());
    for (std::size_t i = 0; i < sources.size(); ++i) {
        src_tokens[i] = tokenize(sources[i], tok);
        if (src_tokens[i].empty()) {
            throw ContractError("test line " + std::to_string(i + 1) +
                                " is empty after normalization");
        }
        ref_tokens[i] = tokenize(targets[i], tok);
    }

    auto sizes = options.sizes;
    if (sizes.empty()) throw ContractError("--sizes must list at least one fraction");
    std::sort(sizes.begin(), sizes.end());
    for (double f : sizes) {
        if (f <= 0.0 || f > 1.0) throw ContractError("size fractions must lie in (0, 1]");
    }
    auto q_grid = options.q_grid;
    if (q_grid.empty()) throw ContractError("--q-grid must list at least one value");
    std::sort(q_grid.begin(), q_grid.end());
    for (int q : q_grid) {
        if (q < 1) throw ContractError("q values must be at least 1");
    }
    int max_q = q_grid.back();
    if (options.top_k < 1) throw ContractError("--top-k must be at least 1");

    auto config = make_rerank_config(options.lambda, options.threshold, max_q, options.min_order,
                                     options.max_order, options.matched_count,
                                     options.average_over);
    PromptTemplate tmpl;
    auto order_policy = parse_order_policy(options.order_policy);
    auto backend = make_backend(options.backend);

    std::vector<nlohmann::ordered_json> dump;
    for (double fraction : sizes) {
        auto n_sub = static_cast<std::size_t>(
            std::llround(fraction * static_cast<double>(datastore.size())));
        if (n_sub < 1) {
            throw ContractError("size fraction " + std::to_string(fraction) +
                                " leaves no datastore examples");
        }
        // Prefixes of one seeded permutation, so smaller subsets nest inside
        // larger ones and coverage comparisons across sizes are meaningful.
        auto sub = sample_pool(datastore, n_sub, options.common.seed);
        auto index = Bm25Index::build(sub, Bm25Params{});
        auto submap = index_by_id(sub);

        std::vector<RerankedSelection> picks(sources.size());
        parallel_for(sources.size(), options.common.threads, [&](std::size_t i) {
            auto hits = index.retrieve(src_tokens[i], options.top_k);
            std::vector<CandidateView> views;
            views.reserve(hits.size());
            for (const auto& hit : hits) {
                const auto& ex = resolve_id(sub, submap, hit.id, "index");
                views.push_back(CandidateView{hit.id, hit.rank, ex.source_tokens});
            }
            picks[i] = rerank(src_tokens[i], views, config);
        });

        for (int q : q_grid) {
            PromptPlan plan;
            plan.task_count = 0;
            plan.q_max = q;
            plan.order_policy = order_policy;
            plan.token_budget = options.token_budget;

            std::vector<std::vector<std::string>> outputs(sources.size());
            std::vector<double> selected_counts(sources.size(), 0.0);
            std::vector<double> coverage_sums;
            std::vector<double> coverage_counts;
            std::mutex coverage_mutex;

            parallel_for(sources.size(), options.common.threads, [&](std::size_t i) {
                std::size_t take = std::min(static_cast<std::size_t>(q),
                                            picks[i].selected.size());
                selected_counts[i] = static_cast<double>(take);

                std::vector<ParallelExample> retrieved;
                std::vector<CandidateView> chosen;
                retrieved.reserve(take);
                chosen.reserve(take);
                for (std::size_t k = 0; k < take; ++k) {
                    const auto& s = picks[i].selected[k];
                    const auto& ex = resolve_id(sub, submap, s.id, "selection");
                    retrieved.push_back(ex);
                    chosen.push_back(CandidateView{s.id, s.rank, ex.source_tokens});
                }
                auto coverage = coverage_report(src_tokens[i], chosen, config.ngram);
                {
                    std::lock_guard<std::mutex> lock(coverage_mutex);
                    for (std::size_t c = 0; c < coverage.orders.size(); ++c) {
                        auto oi = static_cast<std::size_t>(coverage.orders[c] - options.min_order);
                        if (coverage_sums.size() <= oi) {
                            coverage_sums.resize(oi + 1, 0.0);
                            coverage_counts.resize(oi + 1, 0.0);
                        }
                        coverage_sums[oi] += coverage.covered_fraction[c];
                        coverage_counts[oi] += 1.0;
                    }
                }

                auto prompt = assemble_prompt({}, retrieved, sources[i], tmpl, plan);
                auto response = backend->generate(
                    GenerationRequest{prompt.text, options.max_new_tokens, "\n"});
                outputs[i] = tokenize(truncate_output(response.completion, src_tokens[i].size()),
                                      tok);
            });

            auto bleu = corpus_bleu(outputs, ref_tokens);
            double avg_selected = 0.0;
            for (double c : selected_counts) avg_selected += c;
            avg_selected /= static_cast<double>(selected_counts.size());

            nlohmann::ordered_json record;
            record["size_fraction"] = fraction;
            record["size"] = n_sub;
            record["q"] = q;
            record["bleu"] = bleu.score;
            record["avg_selected"] = avg_selected;
            nlohmann::ordered_json avg_coverage = nlohmann::ordered_json::array();
            for (std::size_t oi = 0; oi < coverage_sums.size(); ++oi) {
                if (coverage_counts[oi] == 0.0) continue;
                avg_coverage.push_back(
                    {{"order", options.min_order + static_cast<int>(oi)},
                     {"fraction", coverage_sums[oi] / coverage_counts[oi]}});
            }
            record["avg_coverage"] = avg_coverage;
            dump.push_back(record);
            std::cout << "size " << fraction << " (" << n_sub << " examples), q " << q
                      << ": BLEU " << bleu.score << ", avg selected " << avg_selected << "\n";
        }
    }
    write_jsonl(join_path(options.common.out_dir, "ablation.jsonl"), dump);

    auto config_json = common_json(options.common, "ablate-datastore");
    config_json["datastore"] = to_json(options.datastore);
    config_json["filter"] = to_json(options.filter);
    config_json["test_source"] = options.test_source_path;
    config_json["test_target"] = options.test_target_path;
    config_json["sizes"] = sizes;
    config_json["q_grid"] = q_grid;
    config_json["top_k"] = options.top_k;
    config_json["rerank"] = {{"lambda", options.lambda},
                             {"threshold", options.threshold},
                             {"min_order", options.min_order},
                             {"max_order", options.max_order},
                             {"matched_count", options.matched_count},
                             {"average_over", options.average_over}};
    config_json["order_policy"] = options.order_policy;
    config_json["token_budget"] = options.token_budget;
    config_json["max_new_tokens"] = options.max_new_tokens;
    config_json["backend"] = to_json(options.backend);
    write_json_file(join_path(options.common.out_dir, "run_config.json"), config_json);

    std::cout << "ablation table: " << join_path(options.common.out_dir, "ablation.jsonl") << "\n";
}

}  // namespace icsel::cli
