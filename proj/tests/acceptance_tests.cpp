// Acceptance suite. Each criterion prints one PASS/FAIL line with its
// runtime; the process exits nonzero if any criterion fails. Tolerances are
// pinned inline next to the checks that use them.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "icsel/backend.hpp"
#include "icsel/bm25.hpp"
#include "icsel/corpus.hpp"
#include "icsel/errors.hpp"
#include "icsel/metrics.hpp"
#include "icsel/ngram.hpp"
#include "icsel/prompting.hpp"
#include "icsel/rerank.hpp"
#include "json.hpp"
#include "oracles.hpp"

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Failure {
    std::string message;
};

void ensure(bool ok, const std::string& message) {
    if (!ok) throw Failure{message};
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double value) {
    std::ostringstream out;
    out.precision(17);
    out << value;
    return out.str();
}

fs::path g_work;

int run_cli(const std::string& args) {
    std::string command = std::string(ICSEL_BIN_PATH) + " " + args + " >> " +
                          (g_work / "cli_log.txt").string() + " 2>&1";
    int status = std::system(command.c_str());
    if (status == -1) return -1;
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return -2;
}

void cli_ok(const std::string& args) {
    int code = run_cli(args);
    ensure(code == 0, "command exited with " + std::to_string(code) + ": " + args);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    ensure(in.is_open(), "cannot open " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void spit(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    ensure(out.is_open(), "cannot write " + path.string());
    out << content;
}

std::size_t line_count(const fs::path& path) {
    std::string text = slurp(path);
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

std::vector<std::string> toks(const std::string& line) { return icsel::tokenize(line); }

// Candidate pools need stable token storage behind the spans, so rows are
// collected first and views are built once nothing can reallocate.
struct Pool {
    std::vector<std::int64_t> ids;
    std::vector<int> ranks;
    std::vector<std::vector<std::string>> rows;
    std::vector<icsel::CandidateView> views;

    void add(std::int64_t id, int rank, std::vector<std::string> tokens) {
        ids.push_back(id);
        ranks.push_back(rank);
        rows.push_back(std::move(tokens));
    }

    std::span<const icsel::CandidateView> finish() {
        views.clear();
        views.reserve(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            views.push_back(icsel::CandidateView{ids[i], ranks[i], rows[i]});
        }
        return views;
    }
};

icsel::Corpus make_corpus(const std::vector<std::vector<std::string>>& sources,
                          std::int64_t first_id = 0) {
    icsel::Corpus corpus;
    corpus.role = icsel::CorpusRole::Datastore;
    for (std::size_t i = 0; i < sources.size(); ++i) {
        icsel::ParallelExample example;
        example.id = first_id + static_cast<std::int64_t>(i);
        example.source_tokens = sources[i];
        example.target_tokens = sources[i];
        std::string joined;
        for (const auto& token : sources[i]) {
            if (!joined.empty()) joined += ' ';
            joined += token;
        }
        example.source = joined;
        example.target = joined;
        corpus.examples.push_back(std::move(example));
    }
    return corpus;
}

// ---------------------------------------------------------------------------
// 1. Reranker equivalence against the exhaustive reference.

void criterion1() {
    auto started = Clock::now();
    std::mt19937_64 rng(20240819u);
    const double lambdas[] = {0.0, 0.1, 0.5, 1.0};
    const double thresholds[] = {0.05, 0.3, 1.0};
    const int trials = 220;

    for (int trial = 0; trial < trials; ++trial) {
        std::uniform_int_distribution<int> vocab_d(5, 10);
        int vocab = vocab_d(rng);
        auto sentence = [&](int min_len, int max_len) {
            std::uniform_int_distribution<int> len_d(min_len, max_len);
            std::uniform_int_distribution<int> word_d(0, vocab - 1);
            std::vector<std::string> tokens(len_d(rng));
            for (auto& token : tokens) token = "v" + std::to_string(word_d(rng));
            return tokens;
        };

        std::vector<std::string> source = sentence(1, 12);
        std::uniform_int_distribution<int> pool_d(0, 20);
        int pool_size = pool_d(rng);
        std::vector<int> ranks(pool_size);
        std::iota(ranks.begin(), ranks.end(), 1);
        std::shuffle(ranks.begin(), ranks.end(), rng);

        Pool pool;
        std::vector<oracle::Candidate> reference_pool;
        for (int i = 0; i < pool_size; ++i) {
            auto tokens = sentence(1, 15);
            pool.add(100 + i, ranks[i], tokens);
            reference_pool.push_back(oracle::Candidate{100 + i, ranks[i], tokens});
        }

        icsel::RerankConfig config;
        config.lambda = lambdas[rng() % 4];
        config.threshold = thresholds[rng() % 3];
        config.q_max = static_cast<int>(rng() % 8) + 1;
        config.ngram.min_order = static_cast<int>(rng() % 2) + 1;
        config.ngram.max_order =
            config.ngram.min_order + static_cast<int>(rng() % (5 - config.ngram.min_order));
        bool cap_original = (rng() % 2) == 0;
        bool average_active = (rng() % 2) == 0;
        config.score.matched_count = cap_original ? icsel::MatchedCountMode::Original
                                                  : icsel::MatchedCountMode::Current;
        config.score.average_over = average_active ? icsel::AverageOver::ActiveOrders
                                                   : icsel::AverageOver::FixedFour;

        oracle::RerankParams params;
        params.lambda = config.lambda;
        params.threshold = config.threshold;
        params.q_max = config.q_max;
        params.min_order = config.ngram.min_order;
        params.max_order = config.ngram.max_order;
        params.cap_by_original = cap_original;
        params.average_active = average_active;

        auto got = icsel::rerank(source, pool.finish(), config);
        auto expected = oracle::rerank(source, reference_pool, params);

        std::string tag = "instance " + std::to_string(trial);
        ensure(got.selected.size() == expected.picks.size(),
               tag + ": selected " + std::to_string(got.selected.size()) + " vs reference " +
                   std::to_string(expected.picks.size()));
        for (std::size_t i = 0; i < expected.picks.size(); ++i) {
            const auto& lhs = got.selected[i];
            const auto& rhs = expected.picks[i];
            ensure(lhs.id == rhs.id, tag + " pick " + std::to_string(i) + ": id " +
                                         std::to_string(lhs.id) + " vs " + std::to_string(rhs.id));
            ensure(lhs.rank == rhs.rank, tag + " pick " + std::to_string(i) + ": rank mismatch");
            ensure(lhs.iteration == rhs.iteration,
                   tag + " pick " + std::to_string(i) + ": iteration mismatch");
            ensure(std::fabs(lhs.score - rhs.score) <= 1e-9,
                   tag + " pick " + std::to_string(i) + ": score " + fmt(lhs.score) + " vs " +
                       fmt(rhs.score));
        }
        ensure(std::string(icsel::to_string(got.stopped_by)) == expected.stopped_by,
               tag + ": stop reason " + icsel::to_string(got.stopped_by) + " vs " +
                   expected.stopped_by);
        ensure(got.iterations == expected.iterations, tag + ": iteration count mismatch");
    }

    double elapsed = seconds_since(started);
    ensure(elapsed < 10.0, "took " + fmt(elapsed) + "s, budget is 10s");
}

// ---------------------------------------------------------------------------
// 2. Two reranked picks cover every source unigram; plain top-2 do not.

void criterion2() {
    std::vector<std::string> lines = {
        "Was ist Poulvac FluFend H5N3 RG ?",
        "Poulvac FluFend H5N3 RG ist ein Impfstoff",
        "Wie wird Poulvac FluFend H5N3 RG angewendet ?",
        "Poulvac FluFend H5N3 RG wird Huehnern verabreicht",
        "Welche Risiken sind mit Sebivo verbunden ?",
    };
    // Fillers reuse every frame word, which keeps those words common in the
    // collection and the entity words rare, but in scrambled order: no filler
    // shares a bigram with the source, so none of them can win a rerank round.
    for (int i = 0; i < 15; ++i) {
        lines.push_back("risiken mit welche verbunden sind f" + std::to_string(i) + " ?");
    }
    std::vector<std::vector<std::string>> docs;
    for (const auto& line : lines) docs.push_back(toks(line));
    auto corpus = make_corpus(docs);

    auto index = icsel::Bm25Index::build(corpus);
    auto source = toks("Welche Risiken sind mit Poulvac FluFend H5N3 RG verbunden ?");
    ensure(source.size() == 10, "source should have 10 tokens");

    auto hits = index.retrieve(source, 100);
    ensure(hits.size() >= 2, "expected at least two candidates");

    std::unordered_map<std::int64_t, const std::vector<std::string>*> tokens_by_id;
    for (const auto& example : corpus.examples) {
        tokens_by_id[example.id] = &example.source_tokens;
    }

    Pool top2;
    for (int i = 0; i < 2; ++i) {
        top2.add(hits[i].id, hits[i].rank, *tokens_by_id.at(hits[i].id));
    }
    auto plain = icsel::coverage_report(source, top2.finish(), icsel::NGramConfig{1, 1});
    ensure(plain.covered_fraction.at(0) < 1.0,
           "plain top-2 already cover every unigram (fraction " +
               fmt(plain.covered_fraction.at(0)) + "), pool construction is broken");

    Pool full;
    for (const auto& hit : hits) full.add(hit.id, hit.rank, *tokens_by_id.at(hit.id));
    icsel::RerankConfig config;
    config.lambda = 0.1;
    config.threshold = 0.05;
    config.q_max = 2;
    auto selection = icsel::rerank(source, full.finish(), config);
    ensure(selection.selected.size() == 2,
           "expected two picks, got " + std::to_string(selection.selected.size()));

    Pool chosen;
    for (std::size_t i = 0; i < selection.selected.size(); ++i) {
        const auto& pick = selection.selected[i];
        chosen.add(pick.id, static_cast<int>(i) + 1, *tokens_by_id.at(pick.id));
    }
    auto reranked = icsel::coverage_report(source, chosen.finish(), icsel::NGramConfig{1, 1});
    ensure(reranked.covered_fraction.at(0) >= 1.0 - 1e-12,
           "reranked top-2 cover fraction " + fmt(reranked.covered_fraction.at(0)) +
               ", expected 1.0");
}

// ---------------------------------------------------------------------------
// 3. With lambda 0 the second pick is scored only on unseen unigrams, and a
//    candidate whose overlap is entirely already-covered scores exactly 0.

void criterion3() {
    std::vector<std::string> source = {"a", "b", "c", "d"};
    std::vector<std::string> first = {"a", "b", "c", "q"};
    std::vector<std::string> second = {"c", "d", "z", "w"};
    std::vector<std::string> covered_only = {"a", "b"};
    icsel::NGramConfig unigrams{1, 1};

    icsel::SourceCoverageState state(source, unigrams);
    auto first_grams = icsel::extract_word_ngrams_with_counts(first, unigrams);
    state.downweight(state.matched_grams(first_grams), 0.0);

    auto second_grams = icsel::extract_word_ngrams_with_counts(second, unigrams);
    auto covered_grams = icsel::extract_word_ngrams_with_counts(covered_only, unigrams);
    double second_score = state.overlap_score(second_grams);
    double covered_score = state.overlap_score(covered_grams);
    ensure(std::fabs(second_score - 1.0) <= 1e-12,
           "second candidate should score 1.0 on the single unseen unigram, got " +
               fmt(second_score));
    ensure(covered_score == 0.0,
           "candidate matching only covered grams should score exactly 0, got " +
               fmt(covered_score));

    Pool pool;
    pool.add(1, 1, first);
    pool.add(2, 2, second);
    pool.add(3, 3, covered_only);
    icsel::RerankConfig config;
    config.lambda = 0.0;
    config.threshold = 1e-6;
    config.q_max = 16;
    config.ngram = unigrams;
    auto selection = icsel::rerank(source, pool.finish(), config);

    ensure(selection.selected.size() == 2, "expected exactly two picks");
    ensure(selection.selected[0].id == 1 && selection.selected[1].id == 2,
           "expected picks [1, 2]");
    ensure(std::fabs(selection.selected[1].score - 1.0) <= 1e-12,
           "second pick score should be 1.0, got " + fmt(selection.selected[1].score));
    ensure(selection.stopped_by == icsel::StopReason::Threshold,
           "selection should stop at the threshold once only covered grams remain");
    ensure(selection.iterations == 3, "expected a third scoring round that finds nothing");
}

// ---------------------------------------------------------------------------
// 4. Average selected-example count never grows as the stop threshold rises.

void criterion4() {
    std::mt19937_64 rng(812210u);
    const int families = 30;
    const int width = 8;

    std::vector<std::vector<std::string>> sources;
    std::vector<std::vector<std::string>> docs;
    std::vector<int> content(40);
    std::iota(content.begin(), content.end(), 0);

    for (int family = 0; family < families; ++family) {
        std::shuffle(content.begin(), content.end(), rng);
        std::vector<std::string> base(width);
        for (int j = 0; j < width; ++j) base[j] = "t" + std::to_string(content[j]);
        sources.push_back(base);

        bool with_exact = (family % 2) == 0;
        if (with_exact) {
            docs.push_back(base);
            docs.push_back(base);
        }
        int near = with_exact ? 6 : 8;
        for (int d = 0; d < near; ++d) {
            auto variant = base;
            int position = static_cast<int>(rng() % width);
            variant[position] =
                "r" + std::to_string(family) + "_" + std::to_string(d);
            docs.push_back(variant);
        }
    }
    for (int d = 0; d < 60; ++d) {
        std::vector<std::string> distractor(width);
        for (int j = 0; j < width; ++j) {
            distractor[j] = "d" + std::to_string(rng() % 40);
        }
        docs.push_back(distractor);
    }

    auto corpus = make_corpus(docs);
    auto index = icsel::Bm25Index::build(corpus);
    std::unordered_map<std::int64_t, const std::vector<std::string>*> tokens_by_id;
    for (const auto& example : corpus.examples) {
        tokens_by_id[example.id] = &example.source_tokens;
    }

    const double thresholds[] = {0.1, 1.0, 5.0};
    double averages[3] = {0.0, 0.0, 0.0};
    for (const auto& source : sources) {
        auto hits = index.retrieve(source, 50);
        Pool pool;
        for (const auto& hit : hits) pool.add(hit.id, hit.rank, *tokens_by_id.at(hit.id));
        auto views = pool.finish();
        for (int t = 0; t < 3; ++t) {
            icsel::RerankConfig config;
            config.lambda = 0.1;
            config.threshold = thresholds[t];
            config.q_max = 16;
            auto selection = icsel::rerank(source, views, config);
            averages[t] += static_cast<double>(selection.selected.size());
        }
    }
    for (double& avg : averages) avg /= families;

    ensure(averages[0] >= averages[1] && averages[1] >= averages[2],
           "averages not non-increasing: " + fmt(averages[0]) + ", " + fmt(averages[1]) + ", " +
               fmt(averages[2]));
    ensure(averages[0] > 0.0, "lowest threshold selected nothing, corpus is too disjoint");
}

// ---------------------------------------------------------------------------
// 5. Index retrieval equivalence against the exhaustive scorer.

void criterion5() {
    auto started = Clock::now();
    std::mt19937_64 rng(97532u);
    const double k1_grid[] = {0.9, 1.2, 1.8};
    const double b_grid[] = {0.0, 0.4, 0.75, 1.0};

    for (int corpus_i = 0; corpus_i < 100; ++corpus_i) {
        std::uniform_int_distribution<int> n_docs_d(1, 1000);
        std::uniform_int_distribution<int> len_d(1, 15);
        std::uniform_int_distribution<int> word_d(0, 29);
        int n_docs = n_docs_d(rng);

        std::vector<std::vector<std::string>> docs(n_docs);
        std::vector<oracle::Doc> reference_docs(n_docs);
        for (int d = 0; d < n_docs; ++d) {
            std::vector<std::string> tokens(len_d(rng));
            for (auto& token : tokens) token = "w" + std::to_string(word_d(rng));
            docs[d] = tokens;
            reference_docs[d] = oracle::Doc{7 + 3 * static_cast<std::int64_t>(d), tokens};
        }
        auto corpus = make_corpus(docs, 7);
        for (std::size_t i = 0; i < corpus.examples.size(); ++i) {
            corpus.examples[i].id = 7 + 3 * static_cast<std::int64_t>(i);
        }

        double k1 = k1_grid[rng() % 3];
        double b = b_grid[rng() % 4];
        auto index = icsel::Bm25Index::build(corpus, icsel::Bm25Params{k1, b});

        std::uniform_int_distribution<int> qlen_d(1, 8);
        std::vector<std::string> query(qlen_d(rng));
        for (auto& token : query) token = "w" + std::to_string(word_d(rng));
        if (rng() % 3 == 0) query.push_back("never-in-any-document");

        // Distinct documents can tie exactly in real arithmetic (equal
        // length-to-tf ratios) while the two implementations round them a
        // last-place-unit apart, so tied ids are compared as sets. Groups are
        // cut where the reference ranking's adjacent scores differ by more
        // than the tolerance; a 1e-9 gap cannot be bridged by rounding noise,
        // so distinct scores are still required to be strictly ordered.
        auto got = index.retrieve(query, n_docs);
        auto expected = oracle::bm25(reference_docs, query, k1, b, n_docs);

        std::string tag = "corpus " + std::to_string(corpus_i);
        ensure(got.size() == expected.size(),
               tag + ": " + std::to_string(got.size()) + " hits vs reference " +
                   std::to_string(expected.size()));
        std::size_t group_start = 0;
        while (group_start < expected.size()) {
            std::size_t group_end = group_start + 1;
            while (group_end < expected.size() &&
                   expected[group_end - 1].score - expected[group_end].score <= 1e-9) {
                ++group_end;
            }
            std::vector<std::int64_t> got_ids, expected_ids;
            for (std::size_t i = group_start; i < group_end; ++i) {
                ensure(got[i].rank == static_cast<int>(i) + 1, tag + ": rank mismatch");
                ensure(std::fabs(got[i].score - expected[i].score) <= 1e-9,
                       tag + " hit " + std::to_string(i) + ": score " + fmt(got[i].score) +
                           " vs " + fmt(expected[i].score));
                got_ids.push_back(got[i].id);
                expected_ids.push_back(expected[i].id);
            }
            std::sort(got_ids.begin(), got_ids.end());
            std::sort(expected_ids.begin(), expected_ids.end());
            ensure(got_ids == expected_ids,
                   tag + ": tied ids differ in hits [" + std::to_string(group_start) + ", " +
                       std::to_string(group_end) + ")");
            group_start = group_end;
        }

        // The public depth-limited call must be a prefix of the full ranking.
        auto top100 = index.retrieve(query, 100);
        ensure(top100.size() == std::min<std::size_t>(got.size(), 100),
               tag + ": truncated list has the wrong size");
        for (std::size_t i = 0; i < top100.size(); ++i) {
            ensure(top100[i].id == got[i].id && top100[i].rank == got[i].rank &&
                       top100[i].score == got[i].score,
                   tag + ": truncated list is not a prefix of the full ranking");
        }
    }

    double elapsed = seconds_since(started);
    ensure(elapsed < 30.0, "took " + fmt(elapsed) + "s, budget is 30s");
}

// ---------------------------------------------------------------------------
// 6. BLEU against hand-computed values.

void criterion6() {
    using Sentences = std::vector<std::vector<std::string>>;
    auto lines = [](std::initializer_list<const char*> texts) {
        Sentences out;
        for (const char* text : texts) out.push_back(toks(text));
        return out;
    };
    const double tol = 1e-6;

    struct CorpusCase {
        Sentences hyp;
        Sentences ref;
        double expected;
    };
    std::vector<CorpusCase> corpus_cases = {
        {lines({"a b c d"}), lines({"a b c d e"}), 77.8800783071405},
        {lines({"x y z w", "p q r s"}), lines({"x y z w", "p q r s"}), 100.0},
        {lines({"a b c d"}), lines({"w x y z"}), 0.0},
        {lines({"a b c d e"}), lines({"a b c d"}), 66.8740304976422},
        {lines({"the cat sat on the mat", "dogs bark loudly at night"}),
         lines({"the cat sat on a mat", "dogs bark loudly at night"}), 74.19446627365011},
        {lines({"the the the"}), lines({"the cat"}), 0.0},
        {lines({"the quick brown fox jumps over a lazy dog ."}),
         lines({"the quick brown fox jumped over the lazy dog ."}), 39.2814650900513},
    };
    int case_no = 0;
    for (const auto& test_case : corpus_cases) {
        auto bleu = icsel::corpus_bleu(test_case.hyp, test_case.ref);
        ensure(std::fabs(bleu.score - test_case.expected) <= tol,
               "corpus case " + std::to_string(case_no) + ": got " + fmt(bleu.score) +
                   ", expected " + fmt(test_case.expected));
        ++case_no;
    }

    struct SentenceCase {
        std::vector<std::string> hyp;
        std::vector<std::string> ref;
        double expected;
    };
    std::vector<SentenceCase> sentence_cases = {
        {toks("the the the"), toks("the cat"), 48.549177170732335},
        {toks("a"), toks("a b"), 36.787944117144235},
        {toks("the quick brown fox jumps over a lazy dog ."),
         toks("the quick brown fox jumped over the lazy dog ."), 39.2814650900513},
    };
    for (const auto& test_case : sentence_cases) {
        auto bleu = icsel::sentence_bleu(test_case.hyp, test_case.ref);
        ensure(std::fabs(bleu.score - test_case.expected) <= tol,
               "sentence case " + std::to_string(case_no) + ": got " + fmt(bleu.score) +
                   ", expected " + fmt(test_case.expected));
        ++case_no;
    }
    ensure(case_no == 10, "expected 10 cases, ran " + std::to_string(case_no));
}

// ---------------------------------------------------------------------------
// Shared fixture for the pipeline criteria: a datastore that contains every
// test pair verbatim, plus distractors.

struct PipelineFixture {
    fs::path dir;
    fs::path train_src, train_tgt, test_src, test_tgt;

    explicit PipelineFixture(const fs::path& where) : dir(where) {
        fs::create_directories(dir);
        std::ostringstream tr_src, tr_tgt, te_src, te_tgt;
        for (int i = 0; i < 50; ++i) {
            std::string src = "u" + std::to_string(i) + " alpha" + std::to_string(i % 7) +
                              " beta" + std::to_string(i % 5) + " gamma" +
                              std::to_string(i % 3) + " end" + std::to_string(i % 11);
            std::string tgt = "z" + std::to_string(i) + " ziel" + std::to_string(i % 7) +
                              " wort" + std::to_string(i % 5) + " satz" +
                              std::to_string(i % 3) + " ende" + std::to_string(i % 11);
            tr_src << src << "\n";
            tr_tgt << tgt << "\n";
            te_src << src << "\n";
            te_tgt << tgt << "\n";
        }
        for (int i = 0; i < 20; ++i) {
            tr_src << "d" << i << " alpha" << (i % 7) << " beta" << (i % 5) << " gamma"
                   << (i % 3) << " x" << i << "\n";
            tr_tgt << "y" << i << " ziel" << (i % 7) << " wort" << (i % 5) << " satz" << (i % 3)
                   << " v" << i << "\n";
        }
        train_src = dir / "train.src";
        train_tgt = dir / "train.tgt";
        test_src = dir / "test.src";
        test_tgt = dir / "test.tgt";
        spit(train_src, tr_src.str());
        spit(train_tgt, tr_tgt.str());
        spit(test_src, te_src.str());
        spit(test_tgt, te_tgt.str());
    }

    std::string datastore_flags() const {
        return " --datastore-source " + train_src.string() + " --datastore-target " +
               train_tgt.string();
    }
};

// 7. Closed loop: copy-target scores BLEU 100; echo runs cleanly.

void criterion7() {
    PipelineFixture fixture(g_work / "c7");
    fs::path ix = g_work / "c7" / "ix";
    fs::path rr = g_work / "c7" / "rr";
    fs::path te = g_work / "c7" / "te";
    fs::path te_echo = g_work / "c7" / "te_echo";

    cli_ok("build-index" + fixture.datastore_flags() + " --out-dir " + ix.string());
    cli_ok("retrieve-rerank --index " + (ix / "index.bin").string() +
           fixture.datastore_flags() + " --test-source " + fixture.test_src.string() +
           " --q-max 1 --out-dir " + rr.string());
    cli_ok("translate-eval" + fixture.datastore_flags() + " --test-source " +
           fixture.test_src.string() + " --test-target " + fixture.test_tgt.string() +
           " --selection " + (rr / "selection.jsonl").string() +
           " --q-max 1 --backend copy-target --out-dir " + te.string());

    auto eval = nlohmann::json::parse(slurp(te / "eval.json"));
    ensure(eval.at("n_sentences").get<int>() == 50,
           "expected 50 sentences, got " + eval.at("n_sentences").dump());
    double score = eval.at("bleu").at("score").get<double>();
    ensure(score == 100.0, "copy-target closed loop scored " + fmt(score) + ", expected 100");
    ensure(line_count(te / "outputs.jsonl") == 50, "outputs.jsonl should have 50 records");

    cli_ok("translate-eval" + fixture.datastore_flags() + " --test-source " +
           fixture.test_src.string() + " --test-target " + fixture.test_tgt.string() +
           " --selection " + (rr / "selection.jsonl").string() +
           " --q-max 1 --backend echo --out-dir " + te_echo.string());
    auto echo_eval = nlohmann::json::parse(slurp(te_echo / "eval.json"));
    double echo_score = echo_eval.at("bleu").at("score").get<double>();
    ensure(std::isfinite(echo_score) && echo_score >= 0.0 && echo_score <= 100.0,
           "echo run reported BLEU " + fmt(echo_score));
}

// ---------------------------------------------------------------------------
// 8. Task-level ranking equals a direct BLEU ranking of pool targets.

void criterion8() {
    std::vector<std::vector<std::string>> pool_sources;
    std::vector<std::string> pool_targets = {
        "alpha beta gamma delta",
        "alpha beta gamma",
        "alpha beta",
        "alpha",
        "omega psi chi phi",
        "alpha beta gamma delta epsilon",
        "beta gamma delta",
        "beta gamma delta",
    };
    for (std::size_t i = 0; i < pool_targets.size(); ++i) {
        pool_sources.push_back({"s" + std::to_string(i), "quelle", "text"});
    }
    icsel::Corpus pool = make_corpus(pool_sources);
    for (std::size_t i = 0; i < pool.examples.size(); ++i) {
        pool.examples[i].target = pool_targets[i];
        pool.examples[i].target_tokens = toks(pool_targets[i]);
    }

    icsel::Corpus dev;
    dev.role = icsel::CorpusRole::Dev;
    for (int j = 0; j < 10; ++j) {
        icsel::ParallelExample example;
        example.id = j;
        example.source = "q" + std::to_string(j) + " eins zwei drei vier";
        example.target = "alpha beta gamma delta e" + std::to_string(j);
        example.source_tokens = toks(example.source);
        example.target_tokens = toks(example.target);
        dev.examples.push_back(std::move(example));
    }

    icsel::CopyTargetBackend backend;
    auto ranking = icsel::select_task_prompts(pool, dev, backend);

    struct Scored {
        std::int64_t id;
        double bleu;
    };
    std::vector<Scored> direct;
    std::vector<std::vector<std::string>> refs;
    for (const auto& example : dev.examples) refs.push_back(example.target_tokens);
    for (const auto& example : pool.examples) {
        std::vector<std::vector<std::string>> hyps;
        for (const auto& dev_example : dev.examples) {
            std::string clipped =
                icsel::truncate_output(example.target, dev_example.source_tokens.size());
            hyps.push_back(toks(clipped));
        }
        direct.push_back(Scored{example.id, icsel::corpus_bleu(hyps, refs).score});
    }
    std::sort(direct.begin(), direct.end(), [](const Scored& a, const Scored& b) {
        if (a.bleu != b.bleu) return a.bleu > b.bleu;
        return a.id < b.id;
    });

    ensure(ranking.ranked.size() == direct.size(), "ranking size mismatch");
    for (std::size_t i = 0; i < direct.size(); ++i) {
        ensure(ranking.ranked[i].id == direct[i].id,
               "slot " + std::to_string(i) + ": id " + std::to_string(ranking.ranked[i].id) +
                   " vs direct " + std::to_string(direct[i].id));
        ensure(ranking.ranked[i].dev_bleu == direct[i].bleu,
               "slot " + std::to_string(i) + ": dev BLEU " + fmt(ranking.ranked[i].dev_bleu) +
                   " vs direct " + fmt(direct[i].bleu));
    }
}

// ---------------------------------------------------------------------------
// 9. Byte-identical reruns for every command.

void criterion9() {
    PipelineFixture fixture(g_work / "c9");
    fs::path out = g_work / "c9" / "out";
    fs::path saved = g_work / "c9" / "saved";
    fs::create_directories(saved);

    fs::path ix = out / "ix";
    fs::path rr = out / "rr";
    fs::path task = out / "task";
    fs::path te = out / "te";
    fs::path ab = out / "ab";

    auto run_all = [&]() {
        cli_ok("build-index" + fixture.datastore_flags() + " --seed 7 --threads 2 --out-dir " +
               ix.string());
        cli_ok("retrieve-rerank --index " + (ix / "index.bin").string() +
               fixture.datastore_flags() + " --test-source " + fixture.test_src.string() +
               " --threshold 0.2 --q-max 3 --seed 7 --threads 2 --out-dir " + rr.string());
        cli_ok("select-task-prompt --train-source " + fixture.train_src.string() +
               " --train-target " + fixture.train_tgt.string() + " --dev-source " +
               fixture.test_src.string() + " --dev-target " + fixture.test_tgt.string() +
               " --pool-size 10 --backend copy-target --seed 7 --threads 2 --out-dir " +
               task.string());
        cli_ok("translate-eval" + fixture.datastore_flags() + " --test-source " +
               fixture.test_src.string() + " --test-target " + fixture.test_tgt.string() +
               " --selection " + (rr / "selection.jsonl").string() +
               " --task-ranking " + (task / "task_ranking.jsonl").string() +
               " --task-count 1 --q-max 2 --backend copy-target --seed 7 --threads 2" +
               " --out-dir " + te.string());
        cli_ok("ablate-datastore" + fixture.datastore_flags() + " --test-source " +
               fixture.test_src.string() + " --test-target " + fixture.test_tgt.string() +
               " --sizes 0.5,1.0 --q-grid 1,2 --threshold 0.05 --backend echo" +
               " --seed 7 --threads 2 --out-dir " + ab.string());
    };

    std::vector<fs::path> artifacts = {
        ix / "index.bin",          ix / "run_config.json", rr / "selection.jsonl",
        rr / "run_config.json",    task / "task_ranking.jsonl", task / "run_config.json",
        te / "outputs.jsonl",      te / "eval.json",       te / "run_config.json",
        ab / "ablation.jsonl",     ab / "run_config.json",
    };

    run_all();
    for (const auto& artifact : artifacts) {
        fs::copy_file(artifact, saved / (artifact.parent_path().filename().string() + "_" +
                                         artifact.filename().string()));
    }
    run_all();
    for (const auto& artifact : artifacts) {
        fs::path kept = saved / (artifact.parent_path().filename().string() + "_" +
                                 artifact.filename().string());
        ensure(slurp(artifact) == slurp(kept),
               artifact.parent_path().filename().string() + "/" +
                   artifact.filename().string() + " differs between reruns");
    }
}

// ---------------------------------------------------------------------------
// 10. Scale: 250K-pair index build plus 2,000-source retrieval and rerank
//     within the wall-clock budget.

void criterion10() {
    fs::path dir = g_work / "c10";
    fs::create_directories(dir);
    fs::path train_src = dir / "train.src";
    fs::path train_tgt = dir / "train.tgt";
    fs::path test_src = dir / "test.src";

    const int n_train = 250000;
    const int n_test = 2000;
    const int vocab = 30000;

    std::vector<double> cumulative(vocab);
    double total = 0.0;
    for (int r = 0; r < vocab; ++r) {
        total += 1.0 / (r + 10.0);
        cumulative[r] = total;
    }

    std::mt19937_64 rng(55001u);
    std::uniform_real_distribution<double> unit(0.0, total);
    std::uniform_int_distribution<int> len_d(5, 20);
    auto draw_word = [&]() {
        auto it = std::lower_bound(cumulative.begin(), cumulative.end(), unit(rng));
        return static_cast<int>(it - cumulative.begin());
    };

    {
        std::ofstream src(train_src, std::ios::binary);
        std::ofstream tgt(train_tgt, std::ios::binary);
        std::ofstream test(test_src, std::ios::binary);
        ensure(src.is_open() && tgt.is_open() && test.is_open(), "cannot write scale fixture");
        int stride = n_train / n_test;
        for (int i = 0; i < n_train; ++i) {
            int len = len_d(rng);
            std::string line;
            std::vector<int> words(len);
            for (int j = 0; j < len; ++j) {
                words[j] = draw_word();
                if (j > 0) line += ' ';
                line += 'w';
                line += std::to_string(words[j]);
            }
            src << line << "\n";
            tgt << line << "\n";
            if (i % stride == 0 && i / stride < n_test) {
                int swap_at = static_cast<int>(rng() % len);
                words[swap_at] = draw_word();
                std::string probe;
                for (int j = 0; j < len; ++j) {
                    if (j > 0) probe += ' ';
                    probe += 'w';
                    probe += std::to_string(words[j]);
                }
                test << probe << "\n";
            }
        }
    }

    fs::path ix = dir / "ix";
    fs::path rr = dir / "rr";
    auto started = Clock::now();
    cli_ok("build-index --datastore-source " + train_src.string() + " --datastore-target " +
           train_tgt.string() + " --threads 4 --out-dir " + ix.string());
    cli_ok("retrieve-rerank --index " + (ix / "index.bin").string() +
           " --datastore-source " + train_src.string() + " --datastore-target " +
           train_tgt.string() + " --test-source " + test_src.string() +
           " --top-k 100 --threshold 0.05 --q-max 16 --threads 4 --out-dir " + rr.string());
    double elapsed = seconds_since(started);

    ensure(line_count(rr / "selection.jsonl") == n_test,
           "selection dump should have one record per test source");
    ensure(elapsed < 600.0, "took " + fmt(elapsed) + "s, budget is 600s");
    fs::remove_all(dir);
}

}  // namespace

int main() {
    g_work = fs::temp_directory_path() /
             ("icsel_acceptance_" + std::to_string(::getpid()));
    std::error_code ec;
    fs::create_directories(g_work, ec);
    if (ec) {
        std::fprintf(stderr, "cannot create %s: %s\n", g_work.string().c_str(),
                     ec.message().c_str());
        return 1;
    }

    struct Criterion {
        int number;
        const char* label;
        std::function<void()> body;
    };
    const std::vector<Criterion> criteria = {
        {1, "greedy reranker matches the exhaustive reference on 220 random instances",
         criterion1},
        {2, "two reranked picks cover every source unigram where plain top-2 retrieval does not",
         criterion2},
        {3, "with lambda 0, the second pick scores only unseen unigrams and covered-only "
            "candidates score zero",
         criterion3},
        {4, "average selection count is non-increasing across stop thresholds 0.1, 1.0, 5.0",
         criterion4},
        {5, "index retrieval matches the exhaustive scorer on 100 random corpora", criterion5},
        {6, "BLEU matches 10 hand-computed cases within 1e-6", criterion6},
        {7, "closed-loop pipeline scores BLEU 100 with copy-target and runs clean with echo",
         criterion7},
        {8, "task-level ranking equals direct BLEU ranking of pool targets", criterion8},
        {9, "every command emits byte-identical artifacts across reruns", criterion9},
        {10, "250K-pair build plus 2000-source retrieve-rerank finishes inside 10 minutes",
         criterion10},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        auto started = Clock::now();
        std::string detail;
        bool passed = true;
        try {
            criterion.body();
        } catch (const Failure& failure) {
            passed = false;
            detail = failure.message;
        } catch (const std::exception& error) {
            passed = false;
            detail = std::string("unexpected exception: ") + error.what();
        }
        double elapsed = seconds_since(started);
        std::printf("%s  criterion %2d: %s (%.2fs)\n", passed ? "PASS" : "FAIL",
                    criterion.number, criterion.label, elapsed);
        if (!passed) {
            std::printf("      %s\n", detail.c_str());
            ++failures;
        }
        std::fflush(stdout);
    }

    std::printf("acceptance: %d of %zu criteria passed\n",
                static_cast<int>(criteria.size()) - failures, criteria.size());
    if (failures == 0) {
        fs::remove_all(g_work, ec);
    } else {
        std::printf("artifacts kept in %s\n", g_work.string().c_str());
    }
    std::fflush(stdout);
    return failures == 0 ? 0 : 1;
}
