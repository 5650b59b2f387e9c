#include "icsel/prompting.hpp"

#include <algorithm>
#include <atomic>

#include "icsel/backend.hpp"
#include "icsel/errors.hpp"
#include "icsel/metrics.hpp"
#include "icsel/parallel.hpp"
#include "icsel/rng.hpp"

namespace icsel {

namespace {

struct PatternParts {
    std::string prefix;
    std::string middle;
    std::string suffix;
};

PatternParts split_pattern(const PromptTemplate& tmpl) {
    auto s = tmpl.pattern.find("{source}");
    auto t = tmpl.pattern.find("{target}");
    if (s == std::string::npos || t == std::string::npos || s > t) {
        throw ContractError("example pattern needs {source} before {target}");
    }
    PatternParts parts;
    parts.prefix = tmpl.pattern.substr(0, s);
    parts.middle = tmpl.pattern.substr(s + 8, t - (s + 8));
    parts.suffix = tmpl.pattern.substr(t + 8);
    if (parts.middle.empty()) {
        throw ContractError("example pattern needs a separator between the slots");
    }
    return parts;
}

struct StubParts {
    std::string prefix;
    std::string suffix;
};

StubParts split_stub(const PromptTemplate& tmpl) {
    auto s = tmpl.stub.find("{test_source}");
    if (s == std::string::npos) {
        throw ContractError("stub pattern needs a {test_source} slot");
    }
    return StubParts{tmpl.stub.substr(0, s), tmpl.stub.substr(s + 13)};
}

}  // namespace

std::string escape_slot(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '=': out += "\\="; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string unescape_slot(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '\\') {
            out.push_back(text[i]);
            continue;
        }
        if (i + 1 >= text.size()) throw ContractError("dangling escape in prompt slot");
        char next = text[++i];
        switch (next) {
            case '\\': out.push_back('\\'); break;
            case '=': out.push_back('='); break;
            case 'n': out.push_back('\n'); break;
            case 'r': out.push_back('\r'); break;
            default: throw ContractError(std::string("unknown escape in prompt slot: \\") + next);
        }
    }
    return out;
}

std::string render_example(const PromptTemplate& tmpl, std::string_view source,
                           std::string_view target) {
    auto parts = split_pattern(tmpl);
    return parts.prefix + escape_slot(source) + parts.middle + escape_slot(target) + parts.suffix;
}

std::string render_stub(const PromptTemplate& tmpl, std::string_view test_source) {
    auto parts = split_stub(tmpl);
    return parts.prefix + escape_slot(test_source) + parts.suffix;
}

OrderPolicy parse_order_policy(std::string_view text) {
    if (text == "most_similar_left") return OrderPolicy::MostSimilarLeft;
    if (text == "most_similar_right") return OrderPolicy::MostSimilarRight;
    throw ContractError("unknown order policy: " + std::string(text));
}

const char* to_string(OrderPolicy policy) {
    return policy == OrderPolicy::MostSimilarLeft ? "most_similar_left" : "most_similar_right";
}

int count_budget_tokens(std::string_view text) {
    int count = 0;
    bool in_word = false;
    for (char c : text) {
        bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
        if (space) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++count;
        }
    }
    return count;
}

AssembledPrompt assemble_prompt(std::span<const ParallelExample> task_examples,
                                std::span<const ParallelExample> retrieved,
                                std::string_view test_source, const PromptTemplate& tmpl,
                                const PromptPlan& plan) {
    if (plan.task_count < 0 || plan.q_max < 0 || plan.task_count + plan.q_max < 1) {
        throw ContractError("prompt plan needs task_count >= 0, q_max >= 0, and their sum >= 1");
    }
    if (plan.token_budget < 1) throw ContractError("token budget must be positive");
    if (static_cast<int>(task_examples.size()) > plan.task_count) {
        throw ContractError("more task-level examples than the plan allows");
    }
    if (static_cast<int>(retrieved.size()) > plan.q_max) {
        throw ContractError("more retrieved examples than the plan allows");
    }

    std::vector<std::string> task_lines;
    task_lines.reserve(task_examples.size());
    int fixed_tokens = 0;
    for (const auto& ex : task_examples) {
        task_lines.push_back(render_example(tmpl, ex.source, ex.target));
        fixed_tokens += count_budget_tokens(task_lines.back());
    }
    std::string stub_line = render_stub(tmpl, test_source);
    fixed_tokens += count_budget_tokens(stub_line);

    std::vector<std::string> retrieved_lines;
    retrieved_lines.reserve(retrieved.size());
    std::vector<int> retrieved_tokens;
    retrieved_tokens.reserve(retrieved.size());
    for (const auto& ex : retrieved) {
        retrieved_lines.push_back(render_example(tmpl, ex.source, ex.target));
        retrieved_tokens.push_back(count_budget_tokens(retrieved_lines.back()));
    }

    // Keep the longest prefix of the selection that fits. Dropping runs from
    // the back, so the least similar examples go first whatever the render
    // order ends up being.
    std::size_t kept = retrieved.size();
    int total = fixed_tokens;
    for (std::size_t i = 0; i < retrieved.size(); ++i) total += retrieved_tokens[i];
    while (kept > 0 && total > plan.token_budget) {
        --kept;
        total -= retrieved_tokens[kept];
    }
    if (total > plan.token_budget) {
        throw BudgetError("prompt exceeds the token budget (" + std::to_string(total) + " > " +
                          std::to_string(plan.token_budget) +
                          ") with every retrieved example removed");
    }

    AssembledPrompt out;
    out.token_count = total;
    std::string text;
    for (std::size_t i = 0; i < task_examples.size(); ++i) {
        text += task_lines[i];
        text += tmpl.example_separator;
        out.examples.push_back(PromptExampleRef{task_examples[i].id, ExampleProvenance::TaskLevel});
    }
    auto emit_retrieved = [&](std::size_t i) {
        text += retrieved_lines[i];
        text += tmpl.example_separator;
        out.examples.push_back(PromptExampleRef{retrieved[i].id, ExampleProvenance::Retrieved});
    };
    if (plan.order_policy == OrderPolicy::MostSimilarLeft) {
        for (std::size_t i = 0; i < kept; ++i) emit_retrieved(i);
    } else {
        for (std::size_t i = kept; i-- > 0;) emit_retrieved(i);
    }
    text += stub_line;
    out.text = std::move(text);
    return out;
}

ParsedPrompt parse_prompt(const std::string& text, const PromptTemplate& tmpl) {
    auto pattern = split_pattern(tmpl);
    auto stub = split_stub(tmpl);
    if (tmpl.example_separator.empty()) {
        throw ContractError("example separator must be non-empty");
    }

    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (true) {
        auto next = text.find(tmpl.example_separator, pos);
        if (next == std::string::npos) {
            lines.push_back(text.substr(pos));
            break;
        }
        lines.push_back(text.substr(pos, next - pos));
        pos = next + tmpl.example_separator.size();
    }

    ParsedPrompt out;
    const std::string& last = lines.back();
    if (last.size() < stub.prefix.size() + stub.suffix.size() ||
        last.compare(0, stub.prefix.size(), stub.prefix) != 0 || !last.ends_with(stub.suffix)) {
        throw ContractError("prompt does not end with the test-source stub");
    }
    out.test_source = unescape_slot(std::string_view(last).substr(
        stub.prefix.size(), last.size() - stub.prefix.size() - stub.suffix.size()));

    for (std::size_t li = 0; li + 1 < lines.size(); ++li) {
        const std::string& line = lines[li];
        if (line.size() < pattern.prefix.size() + pattern.suffix.size() ||
            line.compare(0, pattern.prefix.size(), pattern.prefix) != 0 ||
            !line.ends_with(pattern.suffix)) {
            throw ContractError("prompt example line does not match the template");
        }
        std::string_view body = std::string_view(line).substr(
            pattern.prefix.size(), line.size() - pattern.prefix.size() - pattern.suffix.size());
        // Escaping keeps any '=' in slot text behind a backslash, so the
        // first occurrence of the separator is the real slot boundary.
        auto cut = body.find(pattern.middle);
        if (cut == std::string_view::npos) {
            throw ContractError("prompt example line is missing the slot separator");
        }
        out.examples.emplace_back(unescape_slot(body.substr(0, cut)),
                                  unescape_slot(body.substr(cut + pattern.middle.size())));
    }
    return out;
}

Corpus sample_pool(const Corpus& train, std::size_t size, std::uint64_t seed) {
    if (size > train.size()) {
        throw ContractError("pool size " + std::to_string(size) + " exceeds corpus size " +
                            std::to_string(train.size()));
    }
    auto picks = sample_indices(train.size(), size, seed);
    Corpus out;
    out.name = train.name + "#pool";
    out.role = train.role;
    out.examples.reserve(size);
    for (auto i : picks) out.examples.push_back(train.examples[i]);
    return out;
}

TaskPromptRanking select_task_prompts(const Corpus& pool, const Corpus& dev, Backend& backend,
                                      const PromptTemplate& tmpl,
                                      const TaskSelectOptions& options) {
    if (pool.empty()) throw ContractError("task-prompt pool is empty");
    if (dev.empty()) throw ContractError("dev corpus is empty");
    if (options.retries < 0) throw ContractError("retry count must be non-negative");

    std::size_t dev_n = dev.size();
    if (options.dev_limit > 0) dev_n = std::min(dev_n, options.dev_limit);

    std::vector<std::vector<std::string>> references;
    references.reserve(dev_n);
    for (std::size_t i = 0; i < dev_n; ++i) references.push_back(dev.examples[i].target_tokens);

    PromptPlan plan;
    plan.task_count = 1;
    plan.q_max = 0;

    std::vector<double> bleu(pool.size(), 0.0);
    std::atomic<std::size_t> completed{0};

    auto evaluate_pool_example = [&](std::size_t pi) {
        std::span<const ParallelExample> one(&pool.examples[pi], 1);
        std::vector<std::vector<std::string>> outputs;
        outputs.reserve(dev_n);
        for (std::size_t di = 0; di < dev_n; ++di) {
            const auto& dev_ex = dev.examples[di];
            auto prompt = assemble_prompt(one, {}, dev_ex.source, tmpl, plan);
            GenerationRequest request{prompt.text, options.max_new_tokens, "\n"};

            GenerationResponse response;
            int attempt = 0;
            while (true) {
                try {
                    response = backend.generate(request);
                    break;
                } catch (const IoError&) {
                    if (attempt++ >= options.retries) {
                        throw RemoteError("generation failed after " +
                                              std::to_string(options.retries + 1) +
                                              " attempts; ranking incomplete (" +
                                              std::to_string(completed.load()) + " of " +
                                              std::to_string(pool.size()) +
                                              " pool examples finished)",
                                          0);
                    }
                }
            }
            std::size_t src_len = dev_ex.source_tokens.size();
            std::string clipped = src_len > 0 ? truncate_output(response.completion, src_len)
                                              : response.completion;
            outputs.push_back(tokenize(clipped, options.tokenizer));
        }
        bleu[pi] = corpus_bleu(outputs, references).score;
        completed.fetch_add(1);
    };

    parallel_for(pool.size(), options.concurrency, evaluate_pool_example);

    TaskPromptRanking ranking;
    ranking.pool_size = pool.size();
    ranking.ranked.reserve(pool.size());
    for (std::size_t pi = 0; pi < pool.size(); ++pi) {
        ranking.ranked.push_back(TaskPromptRanking::Entry{pool.examples[pi].id, bleu[pi]});
    }
    std::sort(ranking.ranked.begin(), ranking.ranked.end(),
              [](const TaskPromptRanking::Entry& a, const TaskPromptRanking::Entry& b) {
                  if (a.dev_bleu != b.dev_bleu) return a.dev_bleu > b.dev_bleu;
                  return a.id < b.id;
              });
    return ranking;
}

}  // namespace icsel
