#include <benchmark/benchmark.h>

#include "pension/valuation.hpp"
#include "scenarios.hpp"

using namespace pension;

namespace {

const MaritalSolution& lifecycle_solution() {
  static const MaritalSolution sol =
      solve_marital(testing::lifecycle_intensities(), GridSpec{0.1, 125.0, 150.0});
  return sol;
}

}  // namespace

static void BM_Cashflow(benchmark::State& state) {
  const auto set = testing::lifecycle_intensities();
  const auto& sol = lifecycle_solution();
  PolicySpec policy;
  switch (state.range(0)) {
    case 0: policy = PolicySpec::lifelong_annuity(); break;
    case 1: policy = PolicySpec::terminating_annuity(67.0); break;
    default: policy = PolicySpec::lump_sum_at_age(65.0); break;
  }
  policy = policy.resolved(set.spouse_mortality);
  for (auto _ : state) benchmark::DoNotOptimize(cashflow(sol, policy, set.death, sol.grid(), 1));
  state.SetLabel(to_string(policy.kind));
}
BENCHMARK(BM_Cashflow)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

static void BM_Portfolio(benchmark::State& state) {
  AgeBasedAssumptions a{
      IntensityCurve::piecewise_linear({0.0, 18.0, 30.0, 60.0}, {0.0, 0.0, 0.1, 0.02}, 125.0),
      IntensityCurve::constant(0.01, 125.0),
      MortalitySurface(IntensityCurve::gompertz_makeham(5e-4, 7e-5, 0.09, 250.0, 0.25)),
      AgeAtMarriageDensity::truncated_normal(-2.0, 5.0),
      IntensityCurve::gompertz_makeham(5e-4, 8e-5, 0.09, 125.0, 0.25)};
  std::vector<PortfolioMember> members;
  for (int k = 0; k < state.range(0); ++k)
    members.push_back({30.0 + 5.0 * (k % 8), PolicySpec::lifelong_annuity(), 1.0});
  PortfolioOptions opt;
  opt.step = 0.25;
  opt.threads = 1;
  const auto rate = ShortRate::constant(0.02, 125.0);
  for (auto _ : state) benchmark::DoNotOptimize(portfolio_value(members, a, rate, opt));
}
BENCHMARK(BM_Portfolio)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);
