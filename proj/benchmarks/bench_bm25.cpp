#include <benchmark/benchmark.h>

#include <vector>

#include "bench_util.hpp"
#include "icsel/bm25.hpp"

namespace {

void BM_IndexBuild(benchmark::State& state) {
    auto corpus = bench::make_corpus(static_cast<int>(state.range(0)), 20000, 11);
    for (auto _ : state) {
        auto index = icsel::Bm25Index::build(corpus);
        benchmark::DoNotOptimize(index.doc_count());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_IndexBuild)->Arg(10000)->Arg(50000)->Unit(benchmark::kMillisecond);

void BM_Retrieve(benchmark::State& state) {
    static const auto corpus = bench::make_corpus(50000, 20000, 12);
    static const auto index = icsel::Bm25Index::build(corpus);
    bench::WordSampler sampler(20000, 13);
    std::vector<std::vector<std::string>> queries;
    for (int i = 0; i < 64; ++i) queries.push_back(sampler.sentence(5, 20));

    std::size_t q = 0;
    for (auto _ : state) {
        auto hits = index.retrieve(queries[q++ % queries.size()], 100);
        benchmark::DoNotOptimize(hits.data());
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Retrieve)->Unit(benchmark::kMicrosecond);

}  // namespace
