#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "icsel/corpus.hpp"

namespace icsel {

class Backend;

// Two-slot example pattern plus the trailing test stub. Slot text is escaped
// on render ('\' -> "\\", '=' -> "\=", newline -> "\n", CR -> "\r") so the
// literal " = " separator and line structure stay unambiguous and a rendered
// prompt parses back to its inputs.
struct PromptTemplate {
    std::string pattern = "{source} = {target}";
    std::string example_separator = "\n";
    std::string stub = "{test_source} =";
};

std::string escape_slot(std::string_view text);
std::string unescape_slot(std::string_view text);

std::string render_example(const PromptTemplate& tmpl, std::string_view source,
                           std::string_view target);
std::string render_stub(const PromptTemplate& tmpl, std::string_view test_source);

// Where the most similar retrieved example sits relative to the test stub.
// Left puts it first; Right puts it immediately before the stub.
enum class OrderPolicy { MostSimilarLeft, MostSimilarRight };

OrderPolicy parse_order_policy(std::string_view text);
const char* to_string(OrderPolicy policy);

struct PromptPlan {
    int task_count = 0;  // task-level examples, rendered before everything else
    int q_max = 16;      // ceiling on retrieved examples
    OrderPolicy order_policy = OrderPolicy::MostSimilarLeft;
    int token_budget = 3096;  // whitespace tokens over the whole rendered text
};

enum class ExampleProvenance { TaskLevel, Retrieved };

struct PromptExampleRef {
    std::int64_t id = 0;
    ExampleProvenance provenance = ExampleProvenance::Retrieved;
};

struct AssembledPrompt {
    std::vector<PromptExampleRef> examples;  // in render order
    std::string text;
    int token_count = 0;
};

// Builds the prompt: task-level examples first, then retrieved examples
// (`retrieved` must be in selection order, most similar first), then the
// stub. Over budget, retrieved examples are dropped starting from the least
// similar until the prompt fits; task-level examples are never dropped, and
// if they alone exceed the budget a BudgetError is thrown.
AssembledPrompt assemble_prompt(std::span<const ParallelExample> task_examples,
                                std::span<const ParallelExample> retrieved,
                                std::string_view test_source, const PromptTemplate& tmpl = {},
                                const PromptPlan& plan = {});

// Inverse of assembly: example pairs in render order plus the test source.
struct ParsedPrompt {
    std::vector<std::pair<std::string, std::string>> examples;
    std::string test_source;
};

ParsedPrompt parse_prompt(const std::string& text, const PromptTemplate& tmpl = {});

int count_budget_tokens(std::string_view text);

// Uniform sample without replacement; reproducible, and nested across sizes
// for a fixed seed (a smaller sample is a subset of a larger one).
Corpus sample_pool(const Corpus& train, std::size_t size, std::uint64_t seed);

struct TaskPromptRanking {
    struct Entry {
        std::int64_t id = 0;
        double dev_bleu = 0.0;
    };
    std::vector<Entry> ranked;  // dev_bleu non-increasing, ties by id
    std::size_t pool_size = 0;
};

struct TaskSelectOptions {
    std::size_t dev_limit = 0;  // 0 keeps the full dev set
    int max_new_tokens = 256;
    unsigned concurrency = 1;  // parallel pool-example evaluations
    int retries = 2;           // extra attempts per generation before giving up
    TokenizerConfig tokenizer;  // must match how the corpora were tokenized
};

// Scores every pool example as a 1-shot prompt: generate a translation for
// each dev source, clip it to twice the source length, and take corpus BLEU
// against the dev references. The ranking is by that BLEU, descending.
TaskPromptRanking select_task_prompts(const Corpus& pool, const Corpus& dev, Backend& backend,
                                      const PromptTemplate& tmpl = {},
                                      const TaskSelectOptions& options = {});

}  // namespace icsel
