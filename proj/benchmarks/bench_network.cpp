#include <map>

#include <benchmark/benchmark.h>

#include "modcomp/activation.hpp"
#include "modcomp/network.hpp"
#include "modcomp/rng.hpp"
#include "modcomp/synth_data.hpp"
#include "modcomp/trainer.hpp"

namespace {

using namespace modcomp;

DataConfig bench_config() {
  DataConfig cfg;
  cfg.K = 20;
  return cfg;
}

const Dataset& bench_data(std::size_t n) {
  static std::map<std::size_t, Dataset> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    Rng rng = make_stream(1, "bench-data");
    it = cache.emplace(n, sample_dataset(bench_config(), n, rng)).first;
  }
  return it->second;
}

Weights bench_weights() {
  Rng rng = make_stream(1, "bench-init");
  return init_weights(20, 6, {64, 64}, 0.05, rng);
}

void BM_SmoothRelu(benchmark::State& state) {
  const ActParams p;
  double x = -0.5;
  for (auto _ : state) {
    double acc = 0.0;
    for (int i = 0; i < 1024; ++i) acc += smooth_relu(x + i * 1e-3, p);
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_SmoothRelu);

void BM_ForwardMulti(benchmark::State& state) {
  const Dataset& data = bench_data(static_cast<std::size_t>(state.range(0)));
  const Weights W = bench_weights();
  const ActParams p;
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward_multi_batch(W, data.x[0], data.x[1], p));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForwardMulti)->Arg(500)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_GradMulti(benchmark::State& state) {
  const Dataset& data = bench_data(static_cast<std::size_t>(state.range(0)));
  const Weights W = bench_weights();
  const ActParams p;
  for (auto _ : state) benchmark::DoNotOptimize(grad_multi(W, data, p));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GradMulti)->Arg(500)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_GradUni(benchmark::State& state) {
  const Dataset& data = bench_data(4000);
  const UniWeights V = modality_slice(bench_weights(), 0);
  const ActParams p;
  for (auto _ : state) benchmark::DoNotOptimize(grad_uni(V, data.x[0], data.y, p));
}
BENCHMARK(BM_GradUni)->Unit(benchmark::kMillisecond);

void BM_TrainStepsJoint(benchmark::State& state) {
  const Dataset& data = bench_data(4000);
  const ActParams p;
  TrainConfig tc;
  tc.T = 10;
  tc.log_every = 10;
  for (auto _ : state) benchmark::DoNotOptimize(train(bench_weights(), data, tc, p, {}, {}));
}
BENCHMARK(BM_TrainStepsJoint)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
