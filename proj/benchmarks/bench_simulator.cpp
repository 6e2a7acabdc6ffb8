#include <benchmark/benchmark.h>

#include "pension/simulator.hpp"
#include "scenarios.hpp"

using namespace pension;

static void BM_SimulatePaths(benchmark::State& state) {
  const auto sc = testing::monte_carlo_scenarios().at(static_cast<std::size_t>(state.range(0)));
  const MaritalSimulator sim(sc.intensities, sc.grid);
  std::uint64_t index = 0;
  for (auto _ : state) {
    Rng rng = path_rng(1, index++);
    benchmark::DoNotOptimize(sim.simulate(rng));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SimulatePaths)->DenseRange(0, 2);

static void BM_EstimateMarital(benchmark::State& state) {
  const auto sc = testing::monte_carlo_scenarios().at(1);
  SimulationSettings s;
  s.n_paths = static_cast<std::uint64_t>(state.range(0));
  s.grid = sc.grid;
  s.f_times = {20.0, 40.0};
  s.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(estimate_marital(sc.intensities, s));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EstimateMarital)->Arg(100000)->Unit(benchmark::kMillisecond);

static void BM_PolicyMonteCarlo(benchmark::State& state) {
  const auto set = testing::lifecycle_intensities();
  SimulationSettings s;
  s.n_paths = 100000;
  s.grid = GridSpec{0.1, 125.0, 150.0};
  s.threads = 1;
  const auto policy = PolicySpec::terminating_annuity(67.0);
  const auto rate = ShortRate::constant(0.02, 125.0);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_policy_value(set, policy, rate, s));
  state.SetItemsProcessed(state.iterations() * 100000);
}
BENCHMARK(BM_PolicyMonteCarlo)->Unit(benchmark::kMillisecond);
