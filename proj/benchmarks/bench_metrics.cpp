#include <benchmark/benchmark.h>

#include <vector>

#include "bench_util.hpp"
#include "icsel/corpus.hpp"
#include "icsel/metrics.hpp"

namespace {

void BM_CorpusBleu(benchmark::State& state) {
    bench::WordSampler sampler(2000, 31);
    std::vector<std::vector<std::string>> hyps, refs;
    for (int i = 0; i < state.range(0); ++i) {
        auto ref = sampler.sentence(10, 25);
        auto hyp = ref;
        if (hyp.size() > 2) hyp[hyp.size() / 2] = "changed";
        refs.push_back(std::move(ref));
        hyps.push_back(std::move(hyp));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(icsel::corpus_bleu(hyps, refs).score);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CorpusBleu)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

void BM_SentenceBleu(benchmark::State& state) {
    bench::WordSampler sampler(2000, 32);
    auto ref = sampler.sentence(20, 20);
    auto hyp = ref;
    hyp[10] = "changed";
    for (auto _ : state) {
        benchmark::DoNotOptimize(icsel::sentence_bleu(hyp, ref).score);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SentenceBleu);

void BM_Tokenize(benchmark::State& state) {
    std::string line =
        "Welche Risiken sind mit dem Produkt verbunden, und wie (genau) werden sie bewertet?";
    for (auto _ : state) {
        benchmark::DoNotOptimize(icsel::tokenize(line).size());
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Tokenize);

}  // namespace
