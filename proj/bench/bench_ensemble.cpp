// Serial reference loop vs the OpenMP ensemble runner on the cubic problem.
//
//   rtsa_bench --benchmark_filter=Ensemble
#include <benchmark/benchmark.h>

#include <fmt/core.h>

#include "rtsa/config.hpp"
#include "rtsa/ensemble.hpp"

namespace {

rtsa::EnsembleSpec spec_for(std::uint64_t dim, std::uint64_t n_traj) {
  auto cfg = rtsa::parse_config(fmt::format("problem = cubic\ndim = {}\nn_steps = 10000\n", dim));
  cfg.n_trajectories = n_traj;
  return rtsa::EnsembleSpec::from_config(cfg);
}

void BM_EnsembleSerial(benchmark::State& state) {
  const auto spec = spec_for(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(rtsa::run_ensemble_serial(spec));
  state.SetItemsProcessed(state.iterations() * state.range(1) * 10000);
}

void BM_EnsembleOpenMP(benchmark::State& state) {
  const auto spec = spec_for(state.range(0), state.range(1));
  const int workers = static_cast<int>(state.range(2));
  for (auto _ : state) benchmark::DoNotOptimize(rtsa::run_ensemble(spec, workers));
  state.SetItemsProcessed(state.iterations() * state.range(1) * 10000);
  state.counters["workers"] = workers;
}

}  // namespace

// args: dim, trajectories
BENCHMARK(BM_EnsembleSerial)->Args({1, 64})->Args({3, 64})->Unit(benchmark::kMillisecond)->UseRealTime();
// args: dim, trajectories, workers
BENCHMARK(BM_EnsembleOpenMP)
    ->Apply([](benchmark::internal::Benchmark* b) {
      for (int dim : {1, 3})
        for (int w : {1, 2, 4, 8}) b->Args({dim, 64, w});
    })
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

BENCHMARK_MAIN();
