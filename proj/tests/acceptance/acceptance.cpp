// Acceptance suite: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pension/g82.hpp"
#include "pension/marital_solver.hpp"
#include "pension/simulator.hpp"
#include "pension/survival.hpp"
#include "pension/valuation.hpp"
#include "pension_cli/commands.hpp"
#include "scenarios.hpp"

using namespace pension;
using namespace pension::testing;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kMillion = 1000000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double x, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

double null_z(double observed, double expected_p, std::uint64_t n, double width = 1.0) {
  const double se = std::sqrt(expected_p * (1.0 - expected_p) / static_cast<double>(n)) / width;
  const double diff = observed - expected_p / width;
  if (se > 0.0) return diff / se;
  return std::abs(diff) < 1e-12 ? 0.0 : INFINITY;
}

// ---------------------------------------------------------------------------

Outcome closed_form_marriage_probability() {
  auto max_error = [](double step, double* seconds) {
    const auto start = Clock::now();
    const GridSpec grid{step, 50.0, 100.0};
    const auto sol = solve_marital(closed_form_marriage(50.0), grid);
    if (seconds) *seconds = seconds_since(start);
    const auto g = sol.marriage_probability_nodes();
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      worst = std::max(worst, std::abs(g[i] - (1.0 - std::exp(-0.1 * grid.t(i)))));
    return worst;
  };
  double runtime = 0.0;
  const double coarse = max_error(0.1, &runtime);
  const double fine = max_error(0.05, nullptr);
  const double ratio = coarse / fine;
  Outcome o;
  o.pass = coarse <= 1e-5 && ratio >= 3.5 && ratio <= 4.5 && runtime < 1.0;
  o.detail = "max error " + fmt(coarse) + " at 0.1, " + fmt(fine) + " at 0.05 (ratio " +
             fmt(ratio) + "), " + fmt(runtime) + " s";
  return o;
}

// Criteria 2 and 3 share the randomised solutions.
struct RandomRun {
  double conservation_coarse = 0.0;
  double conservation_fine = 0.0;
  double normalisation = 0.0;
  double slowest = 0.0;
};

double normalisation_error(const MaritalSolution& sol) {
  const GridSpec& grid = sol.grid();
  const auto g = sol.marriage_probability_nodes();
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.n_t(); ++i) {
    if (g[i] < 1e-8) continue;
    double mass = 0.0;
    for (std::size_t j = 0; j < grid.n_y(); ++j)
      mass += age_weight(j, grid.n_y(), grid.step) * sol.spouse_age_density(grid.t(i), grid.y(j));
    worst = std::max(worst, std::abs(mass - 1.0));
  }
  return worst;
}

const std::vector<RandomRun>& random_runs() {
  static const std::vector<RandomRun> runs = [] {
    std::vector<RandomRun> out;
    SolverOptions opt;
    opt.nu_cap = 40;
    for (std::uint64_t k = 0; k < 10; ++k) {
      RandomRun r;
      for (double step : {0.1, 0.05}) {
        std::mt19937_64 rng(20240601 + k);
        const IntensitySet set = random_intensities(rng, step);
        const GridSpec grid{step, 80.0, 150.0};
        const auto start = Clock::now();
        validate(set, grid);
        const auto sol = solve_marital(set, grid, opt);
        r.slowest = std::max(r.slowest, seconds_since(start));
        (step == 0.1 ? r.conservation_coarse : r.conservation_fine) = sol.conservation_error();
        r.normalisation = std::max(r.normalisation, normalisation_error(sol));
      }
      out.push_back(r);
    }
    return out;
  }();
  return runs;
}

Outcome probability_conservation() {
  double coarse = 0.0, fine = 0.0, slowest = 0.0;
  for (const auto& r : random_runs()) {
    coarse = std::max(coarse, r.conservation_coarse);
    fine = std::max(fine, r.conservation_fine);
    slowest = std::max(slowest, r.slowest);
  }
  Outcome o;
  o.pass = coarse <= 1e-3 && fine <= 2.5e-4 && slowest < 30.0;
  o.detail = "10 sets, max |sum u + g - 1| " + fmt(coarse) + " at 0.1, " + fmt(fine) +
             " at 0.05, slowest solve " + fmt(slowest) + " s";
  return o;
}

Outcome density_normalisation() {
  double worst = 0.0;
  for (const auto& r : random_runs()) worst = std::max(worst, r.normalisation);
  Outcome o;
  o.pass = worst <= 1e-6;
  o.detail = "max |int f dy - 1| = " + fmt(worst) + " where g >= 1e-8";
  return o;
}

// Criteria 4 and 8 share the simulations.
struct McRun {
  std::string name;
  MaritalSolution solution;
  SimulationEstimate estimate;
  IntensitySet intensities;
  double seconds;
};

const std::vector<McRun>& mc_runs() {
  static const std::vector<McRun> runs = [] {
    std::vector<McRun> out;
    std::uint64_t seed = 4001;
    for (auto& sc : monte_carlo_scenarios()) {
      const auto start = Clock::now();
      SolverOptions opt;
      opt.nu_cap = 40;
      auto sol = solve_marital(sc.intensities, sc.grid, opt);
      SimulationSettings s;
      s.n_paths = kMillion;
      s.seed = seed++;
      s.grid = sc.grid;
      s.f_times = {20.0, 40.0};
      s.bin_width = 1.0;
      auto est = estimate_marital(sc.intensities, s);
      out.push_back({sc.name, std::move(sol), std::move(est), sc.intensities, seconds_since(start)});
    }
    return out;
  }();
  return runs;
}

Outcome monte_carlo_agreement() {
  Outcome o{true, ""};
  for (const auto& run : mc_runs()) {
    const GridSpec& grid = run.solution.grid();
    double worst = 0.0;
    std::size_t tested = 0, within = 0;
    auto record = [&](double z) {
      worst = std::max(worst, std::abs(z));
      ++tested;
      if (std::abs(z) <= 3.0) ++within;
    };
    for (double t : {10.0, 20.0, 30.0, 40.0}) {
      const double p = run.solution.marriage_probability(t);
      record(null_z(interpolate(run.estimate.g_hat, grid.step, t), p, run.estimate.n_paths));
    }
    for (const auto& h : run.estimate.spouse_age) {
      const double g = run.solution.marriage_probability(h.time);
      const auto i = static_cast<std::size_t>(std::llround(h.time / grid.step));
      const auto row = run.solution.joint_density().row(i);
      for (std::size_t b = 0; b < h.counts.size(); ++b) {
        const double mass = std::clamp(
            integrate_interpolant(row, grid.step, h.lower_edge(b), std::min(h.upper_edge(b), grid.y_max)) / g,
            0.0, 1.0);
        if (static_cast<double>(h.denominator) * mass < 5.0) continue;
        record(null_z(h.density(b), mass, h.denominator, h.bin_width));
      }
    }
    const double share = static_cast<double>(within) / static_cast<double>(tested);
    const bool ok = worst <= 4.0 && share >= 0.99 && run.seconds < 120.0;
    o.pass = o.pass && ok;
    o.detail += "\n    " + run.name + ": " + std::to_string(tested) + " points, max |z| " +
                fmt(worst) + ", " + fmt(100.0 * share, 4) + "% within 3 SE, " + fmt(run.seconds) +
                " s" + (ok ? "" : "  <-- failed");
  }
  return o;
}

Outcome g82_equivalence() {
  const auto start = Clock::now();
  const double T = 100.0;
  const double step = 0.05;
  const GridSpec grid{step, T, 150.0};
  const G82Inputs in{
      IntensityCurve::piecewise_linear({0.0, 18.0, 25.0, 35.0, 60.0, 90.0},
                                       {0.0, 0.0, 0.12, 0.08, 0.02, 0.005}, T),
      IntensityCurve::piecewise_linear({0.0, 18.0, 30.0, 60.0, 90.0}, {0.0, 0.0, 0.025, 0.01, 0.002}, T),
      IntensityCurve::gompertz_makeham(5e-4, 7e-5, 0.09, 250.0, step),
      AgeAtMarriageDensity::truncated_normal(-2.0, 5.0), 18.0};
  SolverOptions opt;
  opt.nu_cap = 30;
  const auto age = g82_solve(in, grid, opt);
  const auto general = solve_marital(
      g82_as_general(in, DeathDensity::from_mortality(IntensityCurve::constant(0.02, T), step)), grid,
      opt);
  const auto ga = age.marriage_probability_nodes();
  const auto gg = general.marriage_probability_nodes();
  double dg = 0.0, df = 0.0;
  for (std::size_t i = 0; i < ga.size(); ++i) {
    dg = std::max(dg, std::abs(ga[i] - gg[i]));
    if (ga[i] < 1e-8 || gg[i] < 1e-8) continue;
    for (std::size_t j = 0; j < grid.n_y(); ++j)
      df = std::max(df, std::abs(age.joint_density()(i, j) / ga[i] - general.joint_density()(i, j) / gg[i]));
  }
  const double runtime = seconds_since(start);
  Outcome o;
  o.pass = dg <= 1e-6 && df <= 1e-5 && runtime < 60.0;
  o.detail = "max |dg| " + fmt(dg) + ", max |df| " + fmt(df) + ", " + fmt(runtime) + " s";
  return o;
}

// Toy liability by nested adaptive quadrature of
//   int_0^T h(u) int gf(u, y) int_u^T e^{-rt} e^{-q (t - u)} dt dy du.
double toy_liability_oracle() {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double T = kToyHorizon, gamma = 0.1, r = 0.03, q = 0.02, mu = 0.04;
  auto joint = [&](double u, double y) {
    const double a = std::max(0.0, u + 20.0 - y);
    const double b = std::min(u, u + 40.0 - y);
    return a < b ? (std::exp(-gamma * a) - std::exp(-gamma * b)) / 20.0 : 0.0;
  };
  auto outer = [&](double u) {
    const double paid = GK::integrate(
        [&](double t) { return std::exp(-r * t) * std::exp(-q * (t - u)); }, u, T, 10, 1e-14);
    std::vector<double> cuts{20.0, 40.0, u + 20.0, u + 40.0};
    std::sort(cuts.begin(), cuts.end());
    double married = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
      if (cuts[k + 1] > cuts[k])
        married += GK::integrate([&](double y) { return joint(u, y); }, cuts[k], cuts[k + 1], 10, 1e-14);
    return mu * std::exp(-mu * u) * married * paid;
  };
  return GK::integrate(outer, 0.0, T, 15, 1e-13);
}

Outcome valuation_consistency() {
  Outcome o{true, ""};

  // (a) running integral against a fresh trapezoid of the rate.
  const GridSpec grid{0.1, 125.0, 150.0};
  const IntensitySet life = lifecycle_intensities();
  const auto sol = solve_marital(life, grid);
  const ShortRate rate = ShortRate::constant(0.02, 125.0);
  std::vector<PolicySpec> policies{PolicySpec::lifelong_annuity(), PolicySpec::terminating_annuity(67.0),
                                   PolicySpec::lump_sum_at_age(65.0)};
  policies[0].name = "lifelong";
  policies[0].post_death_mortality = lifecycle_post_death();
  policies[1].name = "terminating c=67";
  policies[2].name = "lump sum c=65";
  double worst_a = 0.0;
  std::vector<double> liabilities;
  for (const auto& p : policies) {
    const auto report = value_policy(sol, life, p, rate);
    const auto& cf = report.cashflow;
    double direct = 0.0;
    for (std::size_t i = 0; i + 1 < cf.rate.size(); ++i) direct += 0.5 * grid.step * (cf.rate[i] + cf.rate[i + 1]);
    worst_a = std::max(worst_a, std::abs(direct - cf.cumulative.back()) / cf.cumulative.back());
    liabilities.push_back(report.liability);
  }
  const bool a_ok = worst_a <= 1e-9;
  o.detail += "\n    (a) max relative |int a - A(t_max)| = " + fmt(worst_a) + (a_ok ? "" : "  <-- failed");

  // (b) toy liability against the triple integral.
  const GridSpec toy_grid{0.1, kToyHorizon, kToyYMax};
  const IntensitySet toy = toy_intensities();
  const double L = value_policy(solve_marital(toy, toy_grid), toy, toy_policy(),
                                ShortRate::constant(0.03, kToyHorizon)).liability;
  const double oracle = toy_liability_oracle();
  const double rel = std::abs(L - oracle) / oracle;
  const bool b_ok = rel <= 1e-6;
  o.detail += "\n    (b) toy L = " + fmt(L, 12) + ", triple integral " + fmt(oracle, 12) +
              ", relative difference " + fmt(rel) + (b_ok ? "" : "  <-- failed");

  // (c) Monte Carlo.
  bool c_ok = true;
  SimulationSettings s;
  s.n_paths = kMillion;
  s.seed = 6003;
  s.grid = grid;
  for (std::size_t k = 0; k < policies.size(); ++k) {
    const auto start = Clock::now();
    const auto e = estimate_policy_value(life, policies[k], rate, s);
    const double z = (e.mean - liabilities[k]) / e.standard_error;
    const bool ok = std::abs(z) <= 3.0;
    c_ok = c_ok && ok;
    o.detail += "\n    (c) " + policies[k].name + ": L = " + fmt(liabilities[k], 7) + ", MC " +
                fmt(e.mean, 7) + " +- " + fmt(e.standard_error, 3) + " (z = " + fmt(z) + ", " +
                fmt(seconds_since(start)) + " s)" + (ok ? "" : "  <-- failed");
  }
  o.pass = a_ok && b_ok && c_ok;
  return o;
}

Outcome lump_sum_atom() {
  const GridSpec grid{0.1, 125.0, 150.0};
  const IntensitySet life = lifecycle_intensities();
  const auto sol = solve_marital(life, grid);
  const double c = 65.0;
  PolicySpec lump = PolicySpec::lump_sum_at_age(c).resolved(life.spouse_mortality);
  const auto cf = cashflow(sol, lump, life.death, grid);
  const double A = cf.cumulative.back();

  // int h(u) int gf(u, y) [1{y >= c} + 1{y < c, u + c - y <= t_max} S(u, y -> c)] dy du
  const auto& joint = sol.joint_density();
  std::vector<double> inner(grid.n_t(), 0.0);
  for (std::size_t i = 0; i < grid.n_t(); ++i) {
    const double u = grid.t(i);
    double sum = 0.0;
    for (std::size_t j = 0; j < grid.n_y(); ++j) {
      const double y = grid.y(j);
      double pay = 0.0;
      if (y >= c - 1e-9) pay = 1.0;
      else if (u + c - y <= grid.t_max + 1e-9)
        pay = spouse_survival(lump.mortality(), u, u + c - y, c, grid.step);
      sum += age_weight(j, grid.n_y(), grid.step) * joint(i, j) * pay;
    }
    inner[i] = life.death.density(u) * sum;
  }
  const double direct = trapezoid(inner, grid.step);
  const double rel = std::abs(A - direct) / direct;
  Outcome o;
  o.pass = rel <= 1e-5;
  o.detail = "A(t_max) = " + fmt(A, 10) + ", direct " + fmt(direct, 10) + ", relative difference " + fmt(rel);
  return o;
}

Outcome stopping_time_density() {
  Outcome o{true, ""};
  for (const auto& run : mc_runs()) {
    const GridSpec& grid = run.solution.grid();
    const auto u0 = run.solution.single_probability(0);
    std::vector<double> density(u0.size());
    for (std::size_t i = 0; i < u0.size(); ++i) density[i] = u0[i] * run.intensities.gamma.rate(grid.t(i));
    const Histogram& h = run.estimate.marriage_times.front();
    double worst = 0.0;
    std::size_t bins = 0;
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      const double mass = integrate_interpolant(density, grid.step, h.lower_edge(b),
                                                std::min(h.upper_edge(b), grid.t_max));
      worst = std::max(worst, std::abs(null_z(h.density(b), mass, h.denominator, h.bin_width)));
      ++bins;
    }
    const bool ok = worst <= 4.0;
    o.pass = o.pass && ok;
    o.detail += "\n    " + run.name + ": " + std::to_string(bins) + " bins, max |z| " + fmt(worst) +
                (ok ? "" : "  <-- failed");
  }
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "pension_acceptance_determinism";
  fs::remove_all(root);
  const fs::path config = fs::path(PENSION_CONFIG_DIR) / "remarriage.yaml";
  std::size_t compared = 0, differing = 0;
  std::ostringstream sink;
  for (const char* cmd : {"solve-marital", "value", "simulate", "compare"}) {
    for (const char* run : {"a", "b"}) {
      pension::cli::run({cmd, "--config", config.string(), "--out", (root / run / cmd).string(),
                         "--paths", "200000", "--quiet"},
                        sink, sink);
    }
    for (const auto& f : fs::directory_iterator(root / "a" / cmd)) {
      ++compared;
      if (slurp(f.path()) != slurp(root / "b" / cmd / f.path().filename())) ++differing;
    }
  }
  // The same paths must come out whatever the worker count.
  const auto sc = monte_carlo_scenarios().at(1);
  SimulationSettings s;
  s.n_paths = 100000;
  s.seed = 77;
  s.grid = sc.grid;
  s.f_times = {20.0};
  s.threads = 1;
  const auto one = estimate_marital(sc.intensities, s);
  s.threads = 5;
  const auto five = estimate_marital(sc.intensities, s);
  const bool threads_ok = one.g_hat == five.g_hat && one.spouse_age[0].counts == five.spouse_age[0].counts;
  fs::remove_all(root);
  Outcome o;
  o.pass = compared >= 15 && differing == 0 && threads_ok;
  o.detail = std::to_string(compared) + " output files compared, " + std::to_string(differing) +
             " differ; 1 vs 5 workers " + (threads_ok ? "identical" : "DIFFERENT");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"closed-form marriage probability", closed_form_marriage_probability},
      {"probability conservation", probability_conservation},
      {"density normalisation", density_normalisation},
      {"Monte Carlo agreement", monte_carlo_agreement},
      {"age-parameterised equivalence", g82_equivalence},
      {"valuation consistency", valuation_consistency},
      {"lump-sum atom", lump_sum_atom},
      {"first-marriage time density", stopping_time_density},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("criterion %zu %s: %s  [%.1f s] %s\n", k + 1, criteria[k].first.c_str(),
                o.pass ? "PASS" : "FAIL", seconds_since(start), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
