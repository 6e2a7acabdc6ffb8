#include <benchmark/benchmark.h>

#include "pension/g82.hpp"
#include "pension/marital_solver.hpp"
#include "scenarios.hpp"

using namespace pension;

// One g_nu layer plus one u_nu layer; cost grows with n_t * n_y.
static void BM_MaritalLayer(benchmark::State& state) {
  const double step = 1.0 / static_cast<double>(state.range(0));
  const GridSpec grid{step, 125.0, 150.0};
  const auto kernel = MaritalKernel::build(testing::lifecycle_intensities(125.0, 150.0, step), grid, 1);
  const std::vector<double> u0 = kernel.gamma_survival;
  for (auto _ : state) {
    const Grid2D g = compute_g_nu_layer(u0, kernel);
    benchmark::DoNotOptimize(compute_u_nu_layer(g, kernel));
  }
  state.counters["cells"] = static_cast<double>(grid.n_t() * grid.n_y());
}
BENCHMARK(BM_MaritalLayer)->Arg(4)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

static void BM_SolveLifecycle(benchmark::State& state) {
  const double step = 1.0 / static_cast<double>(state.range(0));
  const GridSpec grid{step, 125.0, 150.0};
  const auto set = testing::lifecycle_intensities(125.0, 150.0, step);
  SolverOptions opt;
  opt.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(solve_marital(set, grid, opt));
}
BENCHMARK(BM_SolveLifecycle)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

static void BM_SolveAgeParameterised(benchmark::State& state) {
  const double step = 0.1;
  const GridSpec grid{step, 100.0, 150.0};
  const G82Inputs in{
      IntensityCurve::piecewise_linear({0.0, 18.0, 25.0, 60.0}, {0.0, 0.0, 0.12, 0.02}, 100.0),
      IntensityCurve::piecewise_linear({0.0, 18.0, 30.0}, {0.0, 0.0, 0.02}, 100.0),
      IntensityCurve::gompertz_makeham(5e-4, 7e-5, 0.09, 250.0, step),
      AgeAtMarriageDensity::truncated_normal(-2.0, 5.0), 18.0};
  SolverOptions opt;
  opt.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(g82_solve(in, grid, opt));
}
BENCHMARK(BM_SolveAgeParameterised)->Unit(benchmark::kMillisecond);
