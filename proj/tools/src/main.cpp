#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "cli/commands.hpp"
#include "cli/options.hpp"
#include "icsel/errors.hpp"

namespace {

using namespace icsel::cli;

void add_common(CLI::App& cmd, CommonOptions& common) {
    cmd.add_option("--out-dir", common.out_dir, "Directory for outputs and run_config.json")
        ->required();
    cmd.add_option("--seed", common.seed, "Seed for every random choice in the run");
    cmd.add_flag("--lowercase", common.lowercase, "ASCII-lowercase all text while tokenizing");
    cmd.add_option("--threads", common.threads, "Worker threads for per-sentence stages")
        ->envname("ICSEL_CONCURRENCY");
}

void add_corpus_inputs(CLI::App& cmd, CorpusInputs& inputs, const std::string& prefix,
                       const std::string& what) {
    cmd.add_option("--" + prefix + "-source", inputs.source_path,
                   what + " source text, one sentence per line");
    cmd.add_option("--" + prefix + "-target", inputs.target_path,
                   what + " target text, line-aligned with the source file");
    cmd.add_option("--" + prefix + "-jsonl", inputs.jsonl_path,
                   what + " as one JSON record per line (source/target fields)");
}

void add_filter(CLI::App& cmd, FilterFlags& filter) {
    cmd.add_option("--max-tokens", filter.max_tokens,
                   "Drop datastore pairs with a side longer than this");
    cmd.add_option("--max-length-ratio", filter.max_length_ratio,
                   "Drop datastore pairs whose token-count ratio exceeds this");
    cmd.add_flag("!--no-normalize-punct", filter.normalize_punctuation,
                 "Keep curly quotes, long dashes and exotic spaces as-is");
    cmd.add_flag("--dedup", filter.dedup, "Drop exact duplicate datastore pairs");
}

void add_backend(CLI::App& cmd, BackendFlags& backend) {
    cmd.add_option("--backend", backend.kind, "echo | copy-target | lexicon | http")
        ->check(CLI::IsMember({"echo", "copy-target", "lexicon", "http"}));
    cmd.add_option("--endpoint", backend.endpoint, "Completion URL for the http backend")
        ->envname("ICSEL_ENDPOINT");
    cmd.add_option("--lexicon", backend.lexicon_path,
                   "JSON word map for the lexicon backend");
    cmd.add_option("--timeout", backend.timeout_seconds, "HTTP timeout in seconds");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Retrieval-backed example selection for translation prompts"};
    app.require_subcommand(1);

    BuildIndexOptions build_options;
    auto* build = app.add_subcommand("build-index", "Tokenize a datastore and write its index");
    add_common(*build, build_options.common);
    add_corpus_inputs(*build, build_options.datastore, "datastore", "Datastore");
    add_filter(*build, build_options.filter);
    build->add_option("--k1", build_options.k1, "Term-frequency saturation");
    build->add_option("--b", build_options.b, "Length normalization strength");
    build->add_option("--index-out", build_options.index_out,
                      "Index file path (default <out-dir>/index.bin)");

    RetrieveRerankOptions rr_options;
    auto* rr = app.add_subcommand("retrieve-rerank",
                                  "Retrieve candidates per test source and rerank them");
    add_common(*rr, rr_options.common);
    rr->add_option("--index", rr_options.index_path, "Index file from build-index")->required();
    add_corpus_inputs(*rr, rr_options.datastore, "datastore", "Datastore");
    add_filter(*rr, rr_options.filter);
    rr->add_option("--test-source", rr_options.test_source_path,
                   "Test sources, one sentence per line")
        ->required();
    rr->add_option("--top-k", rr_options.top_k, "Candidate pool size per source");
    rr->add_option("--lambda", rr_options.lambda, "Decay on already-matched source grams");
    rr->add_option("--threshold", rr_options.threshold, "Stop when the best score drops below");
    rr->add_option("--q-max", rr_options.q_max, "Ceiling on selected examples per source");
    rr->add_option("--min-order", rr_options.min_order, "Smallest gram order scored");
    rr->add_option("--max-order", rr_options.max_order, "Largest gram order scored");
    rr->add_option("--matched-count", rr_options.matched_count,
                   "Clip matches against original or current counts")
        ->check(CLI::IsMember({"original", "current"}));
    rr->add_option("--average-over", rr_options.average_over,
                   "Geometric mean across active_orders or fixed_four")
        ->check(CLI::IsMember({"active_orders", "fixed_four"}));

    SelectTaskPromptOptions task_options;
    auto* task = app.add_subcommand("select-task-prompt",
                                    "Rank a sampled pool of examples by 1-shot dev BLEU");
    add_common(*task, task_options.common);
    add_corpus_inputs(*task, task_options.train, "train", "Training");
    add_filter(*task, task_options.filter);
    add_corpus_inputs(*task, task_options.dev, "dev", "Dev");
    task->add_option("--pool-size", task_options.pool_size, "Examples sampled from training data");
    task->add_option("--dev-limit", task_options.dev_limit,
                     "Score on this many dev sentences (0 keeps all)");
    task->add_option("--max-new-tokens", task_options.max_new_tokens,
                     "Generation length cap per sentence");
    task->add_option("--retries", task_options.retries,
                     "Extra attempts per generation before giving up");
    task->add_option("--concurrency", task_options.concurrency,
                     "Pool examples evaluated in parallel")
        ->envname("ICSEL_CONCURRENCY");
    add_backend(*task, task_options.backend);

    TranslateEvalOptions eval_options;
    auto* eval = app.add_subcommand("translate-eval",
                                    "Assemble prompts, generate translations and score them");
    add_common(*eval, eval_options.common);
    add_corpus_inputs(*eval, eval_options.datastore, "datastore", "Datastore");
    add_filter(*eval, eval_options.filter);
    eval->add_option("--test-source", eval_options.test_source_path, "Test sources")->required();
    eval->add_option("--test-target", eval_options.test_target_path, "Test references")
        ->required();
    eval->add_option("--selection", eval_options.selection_path,
                     "selection.jsonl from retrieve-rerank")
        ->required();
    eval->add_option("--task-ranking", eval_options.task_ranking_path,
                     "task_ranking.jsonl from select-task-prompt");
    eval->add_option("--task-count", eval_options.task_count,
                     "Top task-ranking examples rendered first in every prompt");
    eval->add_option("--q-max", eval_options.q_max, "Retrieved examples rendered per prompt");
    eval->add_option("--order-policy", eval_options.order_policy,
                     "most_similar_left | most_similar_right")
        ->check(CLI::IsMember({"most_similar_left", "most_similar_right"}));
    eval->add_option("--token-budget", eval_options.token_budget,
                     "Whitespace-token ceiling for the rendered prompt");
    eval->add_option("--max-new-tokens", eval_options.max_new_tokens,
                     "Generation length cap per sentence");
    add_backend(*eval, eval_options.backend);

    AblateOptions ablate_options;
    auto* ablate = app.add_subcommand(
        "ablate-datastore", "Sweep datastore size and example count, reporting BLEU per cell");
    add_common(*ablate, ablate_options.common);
    add_corpus_inputs(*ablate, ablate_options.datastore, "datastore", "Datastore");
    add_filter(*ablate, ablate_options.filter);
    ablate->add_option("--test-source", ablate_options.test_source_path, "Test sources")
        ->required();
    ablate->add_option("--test-target", ablate_options.test_target_path, "Test references")
        ->required();
    ablate->add_option("--sizes", ablate_options.sizes,
                       "Datastore fractions to sweep, each in (0, 1]")
        ->delimiter(',');
    ablate->add_option("--q-grid", ablate_options.q_grid, "Example counts to sweep")
        ->delimiter(',');
    ablate->add_option("--top-k", ablate_options.top_k, "Candidate pool size per source");
    ablate->add_option("--lambda", ablate_options.lambda, "Decay on already-matched source grams");
    ablate->add_option("--threshold", ablate_options.threshold,
                       "Stop when the best score drops below");
    ablate->add_option("--min-order", ablate_options.min_order, "Smallest gram order scored");
    ablate->add_option("--max-order", ablate_options.max_order, "Largest gram order scored");
    ablate->add_option("--matched-count", ablate_options.matched_count,
                       "Clip matches against original or current counts")
        ->check(CLI::IsMember({"original", "current"}));
    ablate->add_option("--average-over", ablate_options.average_over,
                       "Geometric mean across active_orders or fixed_four")
        ->check(CLI::IsMember({"active_orders", "fixed_four"}));
    ablate->add_option("--order-policy", ablate_options.order_policy,
                       "most_similar_left | most_similar_right")
        ->check(CLI::IsMember({"most_similar_left", "most_similar_right"}));
    ablate->add_option("--token-budget", ablate_options.token_budget,
                       "Whitespace-token ceiling for the rendered prompt");
    ablate->add_option("--max-new-tokens", ablate_options.max_new_tokens,
                       "Generation length cap per sentence");
    add_backend(*ablate, ablate_options.backend);

    CLI11_PARSE(app, argc, argv);

    try {
        if (build->parsed()) run_build_index(build_options);
        if (rr->parsed()) run_retrieve_rerank(rr_options);
        if (task->parsed()) run_select_task_prompt(task_options);
        if (eval->parsed()) run_translate_eval(eval_options);
        if (ablate->parsed()) run_ablate_datastore(ablate_options);
    } catch (const icsel::ContractError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const icsel::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
