#include <benchmark/benchmark.h>

#include <vector>

#include "bench_util.hpp"
#include "icsel/ngram.hpp"
#include "icsel/rerank.hpp"

namespace {

struct Fixture {
    std::vector<std::string> source;
    std::vector<std::vector<std::string>> rows;
    std::vector<icsel::CandidateView> views;

    Fixture(int pool_size, std::uint64_t seed) {
        bench::WordSampler sampler(500, seed);
        source = sampler.sentence(15, 15);
        rows.reserve(pool_size);
        for (int i = 0; i < pool_size; ++i) rows.push_back(sampler.sentence(5, 20));
        for (int i = 0; i < pool_size; ++i) {
            views.push_back(icsel::CandidateView{i, i + 1, rows[i]});
        }
    }
};

void BM_Rerank(benchmark::State& state) {
    Fixture fixture(static_cast<int>(state.range(0)), 21);
    icsel::RerankConfig config;
    config.threshold = 0.05;
    config.q_max = 16;
    for (auto _ : state) {
        auto selection = icsel::rerank(fixture.source, fixture.views, config);
        benchmark::DoNotOptimize(selection.selected.data());
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Rerank)->Arg(10)->Arg(100)->Unit(benchmark::kMicrosecond);

void BM_ExtractNGrams(benchmark::State& state) {
    bench::WordSampler sampler(500, 22);
    auto tokens = sampler.sentence(static_cast<int>(state.range(0)),
                                   static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto grams = icsel::extract_word_ngrams_with_counts(tokens);
        benchmark::DoNotOptimize(grams.orders.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ExtractNGrams)->Arg(10)->Arg(50);

void BM_OverlapScore(benchmark::State& state) {
    bench::WordSampler sampler(500, 23);
    auto source = sampler.sentence(15, 15);
    icsel::SourceCoverageState coverage(source);
    auto candidate = icsel::extract_word_ngrams_with_counts(sampler.sentence(15, 15));
    for (auto _ : state) {
        benchmark::DoNotOptimize(coverage.overlap_score(candidate));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_OverlapScore);

}  // namespace
