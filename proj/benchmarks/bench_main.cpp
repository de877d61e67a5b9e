#include <benchmark/benchmark.h>

#include "s2s/core_model.hpp"
#include "s2s/limit_process.hpp"
#include "s2s/trainer.hpp"

using namespace s2s;

static void BM_MaskMatrix(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto data = generate_dataset(n, n, LabelSpec::gaussian(), Basis::Identity, 1);
  const auto init = sample_init(20, n, -50.0, 1);
  for (auto _ : state) benchmark::DoNotOptimize(mask_matrix(data, init));
}
BENCHMARK(BM_MaskMatrix)->Arg(256)->Arg(4096);

static void BM_BuildLimit(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto data = generate_dataset(n, n, LabelSpec::abs_gaussian(), Basis::Identity, 2);
  const auto mask = mask_matrix(data, sample_init(20, n, -50.0, 2));
  for (auto _ : state) benchmark::DoNotOptimize(build(mask, data.labels()));
}
BENCHMARK(BM_BuildLimit)->Arg(64)->Arg(4096);

static void BM_GdStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto data = generate_dataset(n, n, LabelSpec::abs_gaussian(), Basis::Identity, 3);
  auto neurons = scaled_from_init(sample_init(6, n, -500.0, 3));
  for (auto _ : state) {
    gd_step(neurons, data, 0.01);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_GdStep)->Arg(64)->Arg(512);

static void BM_DenseStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto data = generate_dataset(n, n, LabelSpec::gaussian(), Basis::Identity, 4);
  auto net = he_uniform_init(32, n, 4);
  DenseGradientDescent gd(data, 0.001);
  for (auto _ : state) {
    gd.evaluate(net);
    gd.apply(net);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_DenseStep)->Arg(32)->Arg(256);
BENCHMARK_MAIN();
