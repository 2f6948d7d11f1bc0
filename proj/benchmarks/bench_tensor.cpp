#include <benchmark/benchmark.h>

#include "danmaku/layers.hpp"
#include "danmaku/models.hpp"
#include "danmaku/ops.hpp"
#include "danmaku/rng.hpp"

using namespace danmaku;

namespace {

Tensor filled(Shape shape, Rng& rng) {
  Tensor t(std::move(shape), 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-1.0, 1.0);
  return t;
}

// Largest PSGAN generator layer: 128 -> 64 channels, kernel 4, stride 2.
void BM_ConvTransposeForwardBackward(benchmark::State& state) {
  Rng rng(1);
  Parameter x("x", filled({12, 128, 28}, rng));
  Parameter w("w", filled({128, 64, 4}, rng));
  Parameter b("b", filled({64}, rng));
  for (auto _ : state) {
    Tape tape;
    auto y = ops::conv1d_transpose(tape.parameter(x), tape.parameter(w), tape.parameter(b), 2, 0);
    tape.backward(ops::sum(y));
  }
}
BENCHMARK(BM_ConvTransposeForwardBackward)->Unit(benchmark::kMicrosecond);

void BM_ConvForwardBackward(benchmark::State& state) {
  Rng rng(2);
  Parameter x("x", filled({12, 64, 31}, rng));
  Parameter w("w", filled({128, 64, 4}, rng));
  Parameter b("b", filled({128}, rng));
  for (auto _ : state) {
    Tape tape;
    auto y = ops::conv1d(tape.parameter(x), tape.parameter(w), tape.parameter(b), 1, 0);
    tape.backward(ops::sum(y));
  }
}
BENCHMARK(BM_ConvForwardBackward)->Unit(benchmark::kMicrosecond);

void BM_LstmStack(benchmark::State& state) {
  Rng rng(3);
  const auto hidden = static_cast<std::size_t>(state.range(0));
  LstmStack net("lstm", 8, hidden, 3, rng);
  const Tensor input = filled({12, 64, 8}, rng);
  for (auto _ : state) {
    Tape tape;
    auto y = net.forward(Binder(tape, true), tape.constant(input));
    tape.backward(ops::mean(y));
  }
}
BENCHMARK(BM_LstmStack)->Arg(24)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Generate(benchmark::State& state) {
  auto model = make_model(static_cast<ModelKind>(state.range(0)), 1);
  Rng rng(4);
  for (auto _ : state) benchmark::DoNotOptimize(model->generate(30, rng));
  state.SetLabel(std::string(model_name(model->kind())));
}
BENCHMARK(BM_Generate)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
