// Serial reference against the OpenMP kernels. Each benchmark takes the
// worker count as its argument; 1 runs the plain loop.
#include <benchmark/benchmark.h>
#include <omp.h>

#include "twophase/analytic.hpp"
#include "twophase/regeneration.hpp"
#include "twophase/simulate.hpp"

using namespace twophase;

namespace {

TwoPhaseModel ballistic() {
  return TwoPhaseModel::make(DriftFunction::constant(1.0), DriftFunction::constant(0.5),
                             DownCrossing::constant(1.0), 0.0);
}

TwoPhaseModel loglog_k2() {
  return TwoPhaseModel::make(DriftFunction::iterated_log(16.0, {{2, 0.5}, {3, 1.0}}),
                             DriftFunction::constant(0.0), DownCrossing::constant(1.0), 16.0);
}

PathConfig paths(double horizon) {
  PathConfig c;
  c.dt = 1e-3;
  c.horizon = horizon;
  c.seed = 1;
  c.bridge_correction = true;
  return c;
}

void worker_args(benchmark::internal::Benchmark* b) {
  b->Arg(1);
  const int max = omp_get_max_threads();
  for (int w = 2; w < max; w *= 2) b->Arg(w);
  if (max > 1) b->Arg(max);
  b->Unit(benchmark::kMillisecond)->UseRealTime();
}

void BM_SampleCycles(benchmark::State& state) {
  const auto m = ballistic();
  const Execution ex{static_cast<int>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(sample_cycles(m, paths(100.0), 256, ex));
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_SampleCycles)->Apply(worker_args);

void BM_SimulateChains(benchmark::State& state) {
  const ModelAnalytics an(loglog_k2());
  const Execution ex{static_cast<int>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(simulate_chains(an, 2000, 16, 1, ex));
  state.SetItemsProcessed(state.iterations() * 16 * 2000);
}
BENCHMARK(BM_SimulateChains)->Apply(worker_args);

void BM_HittingMonteCarlo(benchmark::State& state) {
  const auto m = TwoPhaseModel::make(DriftFunction::constant(1.0), DriftFunction::constant(0.0),
                                     DownCrossing::constant(1.0), 5.0);
  auto cfg = paths(1.0);
  cfg.max_steps = 10000000;
  const Execution ex{static_cast<int>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(hitting_monte_carlo(m, 4.0, 1.0, cfg, 2000, ex));
  state.SetItemsProcessed(state.iterations() * 2000);
}
BENCHMARK(BM_HittingMonteCarlo)->Apply(worker_args);

void BM_EstimateSpeed(benchmark::State& state) {
  const auto m = ballistic();
  const Execution ex{static_cast<int>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(estimate_speed(m, paths(50.0), 16, ex));
  state.SetItemsProcessed(state.iterations() * 16);
}
BENCHMARK(BM_EstimateSpeed)->Apply(worker_args);

}  // namespace

BENCHMARK_MAIN();
