#include <benchmark/benchmark.h>

#include "danmaku/agent.hpp"
#include "danmaku/corpus.hpp"
#include "danmaku/metrics.hpp"
#include "danmaku/sim.hpp"
#include "danmaku/trainer.hpp"

using namespace danmaku;

namespace {

const CorpusManifest& corpus() {
  static const CorpusManifest c = build_corpus(34, 7);
  return c;
}

void BM_SimulateAndScore(benchmark::State& state) {
  const auto seq = unroll(corpus().programs[static_cast<std::size_t>(state.range(0))]);
  int frames = 0;
  for (auto _ : state) {
    const auto trace = run(seq);
    benchmark::DoNotOptimize(evaluate(trace));
    frames = trace.t_total;
  }
  state.counters["T_total"] = frames;
}
BENCHMARK(BM_SimulateAndScore)->DenseRange(0, 5)->Unit(benchmark::kMillisecond);

void BM_MarkCoverage(benchmark::State& state) {
  const double r = static_cast<double>(state.range(0));
  std::vector<std::uint8_t> covered(56 * 48);
  double x = 10.0;
  for (auto _ : state) {
    std::fill(covered.begin(), covered.end(), 0);
    benchmark::DoNotOptimize(mark_coverage(x, 200.0, r, 56, 48, 8, covered));
    x = x > 370.0 ? 10.0 : x + 1.7;
  }
}
BENCHMARK(BM_MarkCoverage)->Arg(2)->Arg(8)->Arg(16);

void BM_EvaluateCorpus(benchmark::State& state) {
  std::vector<ParametricSequence> seqs;
  for (std::size_t i = 0; i < 30; ++i) seqs.push_back(unroll(corpus().programs[i]));
  const auto workers = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_sequences(seqs, workers));
}
BENCHMARK(BM_EvaluateCorpus)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_AgentPlayability(benchmark::State& state) {
  const auto seq = unroll(corpus().programs[3]);
  AgentConfig cfg;
  cfg.horizon = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(playability(seq, cfg));
}
BENCHMARK(BM_AgentPlayability)->Arg(10)->Arg(30)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
