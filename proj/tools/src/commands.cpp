#include "pension_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "pension/csv.hpp"
#include "pension/errors.hpp"
#include "pension/g82.hpp"
#include "pension/marital_solver.hpp"
#include "pension/simulator.hpp"
#include "pension/valuation.hpp"
#include "pension_cli/config.hpp"

namespace pension::cli {

namespace {

namespace fs = std::filesystem;

struct Context {
  ScenarioConfig config;
  fs::path out_dir;
  std::ostream& out;
  bool quiet;

  const char* time_column() const { return config.g82() ? "x" : "t"; }
  fs::path file(const std::string& name) const { return out_dir / name; }
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
}

MaritalSolution solve(const Context& ctx) {
  const ScenarioConfig& c = ctx.config;
  if (c.g82()) return g82_solve(build_g82_inputs(c), c.grid, solver_options(c));
  const IntensitySet set = build_intensities(c);
  validate(set, c.grid);
  return solve_marital(set, c.grid, solver_options(c));
}

std::vector<double> times_or(const std::vector<double>& given, std::vector<double> fallback,
                             double t_max) {
  std::vector<double> out;
  for (double t : given.empty() ? fallback : given)
    if (t >= 0.0 && t <= t_max + 1e-9) out.push_back(t);
  return out;
}

std::vector<double> report_times(const ScenarioConfig& c) {
  std::vector<double> every_ten;
  for (double t = 10.0; t <= c.grid.t_max + 1e-9; t += 10.0) every_ten.push_back(t);
  return times_or(c.report_f_times, every_ten, c.grid.t_max);
}

// Joint density row at time t, linear between grid rows.
std::vector<double> joint_row(const MaritalSolution& sol, double t) {
  const GridSpec& g = sol.grid();
  const double pos = std::clamp(t / g.step, 0.0, static_cast<double>(g.n_t() - 1));
  const auto i0 = static_cast<std::size_t>(std::floor(pos));
  const std::size_t i1 = std::min(i0 + 1, g.n_t() - 1);
  const double w = pos - static_cast<double>(i0);
  std::vector<double> row(g.n_y());
  for (std::size_t j = 0; j < row.size(); ++j)
    row[j] = (1.0 - w) * sol.joint_density()(i0, j) + w * sol.joint_density()(i1, j);
  return row;
}

void write_marital(const Context& ctx, const MaritalSolution& sol) {
  const GridSpec& grid = sol.grid();
  const char* tc = ctx.time_column();
  {
    CsvWriter csv(ctx.file("marital.csv"),
                  {tc, "g", "u0", "u_remarriageable", "conservation_residual"});
    const auto g = sol.marriage_probability_nodes();
    const auto u0 = sol.single_probability(0);
    for (std::size_t i = 0; i < grid.n_t(); ++i) {
      double later = 0.0;
      for (int nu = 1; nu <= sol.nu_max_used(); ++nu) later += sol.single_probability(nu)[i];
      csv.cell(grid.t(i)).cell(g[i]).cell(u0[i]).cell(later).cell(u0[i] + later + g[i] - 1.0);
      csv.end_row();
    }
    csv.close();
  }
  {
    CsvWriter csv(ctx.file("layers.csv"), {"nu", tc, "u_prev", "u", "mass"});
    for (const auto& layer : sol.layers()) {
      for (std::size_t i = 0; i < grid.n_t(); ++i) {
        csv.cell(layer.nu).cell(grid.t(i)).cell(layer.u_prev[i]).cell(layer.u[i]).cell(layer.mass[i]);
        csv.end_row();
      }
    }
    csv.close();
  }
  {
    CsvWriter csv(ctx.file("spouse_age_density.csv"), {tc, "y", "f"});
    for (double t : report_times(ctx.config)) {
      const double g = sol.marriage_probability(t);
      if (g < kMarriageFloor) continue;
      const auto row = joint_row(sol, t);
      for (std::size_t j = 0; j < row.size(); ++j) {
        csv.cell(t).cell(grid.y(j)).cell(std::max(0.0, row[j] / g));
        csv.end_row();
      }
    }
    csv.close();
  }
}

int cmd_solve(const Context& ctx) {
  const MaritalSolution sol = solve(ctx);
  write_marital(ctx, sol);
  if (!ctx.quiet) {
    const auto g = sol.marriage_probability_nodes();
    ctx.out << "layers used: " << sol.nu_max_used()
            << "\ntruncation residual: " << format_double(sol.truncation_residual())
            << "\nconservation error: " << format_double(sol.conservation_error())
            << "\nmax g: " << format_double(*std::max_element(g.begin(), g.end())) << '\n';
  }
  return kSuccess;
}

int cmd_value(const Context& ctx) {
  const ScenarioConfig& c = ctx.config;
  if (c.policies.empty()) throw ConfigError("`policies` must list at least one policy to value");
  const IntensitySet set = build_intensities(c);
  const MaritalSolution sol = solve(ctx);
  const ShortRate rate = build_short_rate(c);
  const auto policies = build_policies(c);
  const char* tc = ctx.time_column();

  CsvWriter summary(ctx.file("summary.csv"),
                    {"policy", "kind", "liability", "expected_total_payment",
                     "death_mass_beyond_horizon"});
  std::ostringstream text;
  for (const auto& policy : policies) {
    const ValuationReport report = value_policy(sol, set, policy, rate);
    CsvWriter csv(ctx.file("cashflow_" + policy.name + ".csv"),
                  {tc, "a", "A", "a_immediate", "discount"});
    const auto& cf = report.cashflow;
    for (std::size_t i = 0; i < cf.rate.size(); ++i) {
      csv.cell(cf.grid.t(i)).cell(cf.rate[i]).cell(cf.cumulative[i]).cell(cf.immediate[i]).cell(
          report.discount[i]);
      csv.end_row();
    }
    csv.close();
    summary.cell(policy.name).cell(to_string(policy.kind)).cell(report.liability)
        .cell(cf.cumulative.back()).cell(report.death_mass_beyond_horizon);
    summary.end_row();
    text << "policy " << policy.name << " (" << to_string(policy.kind) << ")\n"
         << "  L = " << format_double(report.liability) << '\n'
         << "  A(t_max) = " << format_double(cf.cumulative.back()) << '\n'
         << "  P(T > t_max) = " << format_double(report.death_mass_beyond_horizon) << '\n'
         << "  " << report.parameters << '\n';
  }
  summary.close();

  if (c.portfolio) {
    const auto& pf = *c.portfolio;
    const double step = c.grid.step;
    AgeBasedAssumptions assumptions{
        build_curve(c.gamma, pf.max_age, step), build_curve(c.sigma, pf.max_age, step),
        set.spouse_mortality, build_age_density(c.age_at_marriage),
        build_curve(pf.insured_mortality, pf.max_age, step)};
    std::vector<PortfolioMember> members;
    for (const auto& m : pf.members) {
      const auto it = std::find_if(policies.begin(), policies.end(),
                                   [&](const PolicySpec& p) { return p.name == m.policy; });
      members.push_back({m.initial_age, *it, m.weight});
    }
    PortfolioOptions options;
    options.step = step;
    options.max_age = pf.max_age;
    options.y_max = c.grid.y_max;
    options.solver = solver_options(c);
    const PortfolioValuation pv = portfolio_value(members, assumptions, rate, options);
    CsvWriter csv(ctx.file("portfolio.csv"), {"member", "initial_age", "policy", "weight", "liability"});
    for (std::size_t k = 0; k < pv.members.size(); ++k) {
      const auto& m = pv.members[k];
      csv.cell(k).cell(m.initial_age).cell(m.report.policy_name).cell(m.weight).cell(m.report.liability);
      csv.end_row();
    }
    csv.close();
    text << "portfolio: " << pv.members.size() << " members, " << pv.distinct_solutions
         << " distinct ages, total L = " << format_double(pv.total) << '\n';
  }

  write_text(ctx.file("summary.txt"), text.str());
  if (!ctx.quiet) ctx.out << text.str();
  return kSuccess;
}

void write_histograms(CsvWriter& csv, const std::string& event,
                      const std::vector<Histogram>& hs) {
  for (const auto& h : hs) {
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      csv.cell(event).cell(h.nu).cell(h.lower_edge(b)).cell(h.upper_edge(b)).cell(h.counts[b])
          .cell(h.density(b)).cell(h.standard_error(b));
      csv.end_row();
    }
  }
}

int cmd_simulate(const Context& ctx) {
  const ScenarioConfig& c = ctx.config;
  const IntensitySet set = build_intensities(c);
  validate(set, c.grid);
  SimulationSettings settings = simulation_settings(c);
  settings.f_times = times_or(c.simulation.f_times, report_times(c), c.grid.t_max);
  const SimulationEstimate est = estimate_marital(set, settings);
  const char* tc = ctx.time_column();

  {
    std::vector<std::string> header{tc, "g_hat", "g_se"};
    for (std::size_t nu = 1; nu < est.at_least_marriages.size(); ++nu)
      header.push_back("at_least_" + std::to_string(nu));
    CsvWriter csv(ctx.file("simulated_marital.csv"), header);
    for (std::size_t i = 0; i < est.g_hat.size(); ++i) {
      csv.cell(c.grid.t(i)).cell(est.g_hat[i]).cell(est.g_se[i]);
      for (std::size_t nu = 1; nu < est.at_least_marriages.size(); ++nu)
        csv.cell(est.at_least_marriages[nu][i]);
      csv.end_row();
    }
    csv.close();
  }
  {
    CsvWriter csv(ctx.file("simulated_spouse_age.csv"),
                  {tc, "y_lower", "y_upper", "count", "density", "se"});
    for (const auto& h : est.spouse_age) {
      for (std::size_t b = 0; b < h.counts.size(); ++b) {
        csv.cell(h.time).cell(h.lower_edge(b)).cell(h.upper_edge(b)).cell(h.counts[b])
            .cell(h.density(b)).cell(h.standard_error(b));
        csv.end_row();
      }
    }
    csv.close();
  }
  {
    CsvWriter csv(ctx.file("stopping_times.csv"),
                  {"event", "nu", "lower", "upper", "count", "density", "se"});
    write_histograms(csv, "marriage", est.marriage_times);
    write_histograms(csv, "end_of_marriage", est.single_times);
    csv.close();
  }
  std::ostringstream text;
  text << "paths: " << est.n_paths << "  seed: " << settings.seed << '\n';
  if (!c.policies.empty()) {
    const ShortRate rate = build_short_rate(c);
    CsvWriter csv(ctx.file("simulated_policies.csv"),
                  {"policy", "kind", "mean", "se", "n_paths", "paying_paths"});
    for (const auto& policy : build_policies(c)) {
      const PolicyEstimate e = estimate_policy_value(set, policy, rate, settings);
      csv.cell(policy.name).cell(to_string(policy.kind)).cell(e.mean).cell(e.standard_error)
          .cell(e.n_paths).cell(e.paying_paths);
      csv.end_row();
      text << "policy " << policy.name << ": " << format_double(e.mean) << " +- "
           << format_double(e.standard_error) << '\n';
    }
    csv.close();
  }
  if (!ctx.quiet) ctx.out << text.str();
  return kSuccess;
}

double z_score(double simulated, double analytic, double se) {
  const double diff = simulated - analytic;
  if (se > 0.0) return diff / se;
  return std::abs(diff) < 1e-12 ? 0.0 : std::copysign(INFINITY, diff);
}

int cmd_compare(const Context& ctx) {
  const ScenarioConfig& c = ctx.config;
  const IntensitySet set = build_intensities(c);
  validate(set, c.grid);
  const MaritalSolution sol = solve_marital(set, c.grid, solver_options(c));
  SimulationSettings settings = simulation_settings(c);
  const auto g_times = times_or(c.simulation.g_times, {10, 20, 30, 40}, c.grid.t_max);
  settings.f_times = times_or(c.simulation.f_times, {20, 40}, c.grid.t_max);
  settings.tracked_layers = std::max(1, settings.tracked_layers);
  const SimulationEstimate est = estimate_marital(set, settings);
  const auto n = static_cast<double>(est.n_paths);
  const char* tc = ctx.time_column();

  double worst = 0.0;
  std::size_t tested = 0;
  std::size_t within3 = 0;
  auto record = [&](double z) {
    worst = std::max(worst, std::abs(z));
    ++tested;
    if (std::abs(z) <= 3.0) ++within3;
  };

  {
    CsvWriter csv(ctx.file("compare_g.csv"), {tc, "analytic", "simulated", "se", "z"});
    for (double t : g_times) {
      const double p = sol.marriage_probability(t);
      const double sim = interpolate(est.g_hat, c.grid.step, t);
      const double se = SimulationEstimate::binomial_se(p, est.n_paths);
      const double z = z_score(sim, p, se);
      record(z);
      csv.cell(t).cell(p).cell(sim).cell(se).cell(z);
      csv.end_row();
    }
    csv.close();
  }
  {
    CsvWriter csv(ctx.file("compare_f.csv"),
                  {tc, "y_lower", "y_upper", "analytic", "simulated", "se", "z", "tested"});
    for (const auto& h : est.spouse_age) {
      const double g = sol.marriage_probability(h.time);
      if (g < kMarriageFloor || !h.available()) continue;
      const auto row = joint_row(sol, h.time);
      const auto married = static_cast<double>(h.denominator);
      for (std::size_t b = 0; b < h.counts.size(); ++b) {
        const double lo = h.lower_edge(b);
        const double hi = std::min(h.upper_edge(b), c.grid.y_max);
        const double mass = std::clamp(integrate_interpolant(row, c.grid.step, lo, hi) / g, 0.0, 1.0);
        const double analytic = mass / h.bin_width;
        const double se = std::sqrt(mass * (1.0 - mass) / married) / h.bin_width;
        const bool use = married * mass >= kMinExpectedCount;
        const double z = z_score(h.density(b), analytic, se);
        if (use) record(z);
        csv.cell(h.time).cell(lo).cell(h.upper_edge(b)).cell(analytic).cell(h.density(b)).cell(se)
            .cell(use ? z : 0.0).cell(use ? 1 : 0);
        csv.end_row();
      }
    }
    csv.close();
  }
  {
    // First marriage time against u_0 gamma.
    CsvWriter csv(ctx.file("compare_first_marriage.csv"),
                  {"lower", "upper", "analytic", "simulated", "se", "z", "tested"});
    const Histogram& h = est.marriage_times.front();
    const auto u0 = sol.single_probability(0);
    std::vector<double> density(u0.size());
    for (std::size_t i = 0; i < u0.size(); ++i) density[i] = u0[i] * set.gamma.rate(c.grid.t(i));
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      const double lo = h.lower_edge(b);
      const double hi = std::min(h.upper_edge(b), c.grid.t_max);
      const double mass = std::clamp(integrate_interpolant(density, c.grid.step, lo, hi), 0.0, 1.0);
      const double se = std::sqrt(mass * (1.0 - mass) / n) / h.bin_width;
      const bool use = n * mass >= kMinExpectedCount;
      const double z = z_score(h.density(b), mass / h.bin_width, se);
      if (use) record(z);
      csv.cell(lo).cell(h.upper_edge(b)).cell(mass / h.bin_width).cell(h.density(b)).cell(se)
          .cell(use ? z : 0.0).cell(use ? 1 : 0);
      csv.end_row();
    }
    csv.close();
  }
  if (!c.policies.empty()) {
    const ShortRate rate = build_short_rate(c);
    CsvWriter csv(ctx.file("compare_policies.csv"),
                  {"policy", "analytic", "simulated", "se", "z"});
    for (const auto& policy : build_policies(c)) {
      const ValuationReport report = value_policy(sol, set, policy, rate);
      const PolicyEstimate e = estimate_policy_value(set, policy, rate, settings);
      const double z = z_score(e.mean, report.liability, e.standard_error);
      record(z);
      csv.cell(policy.name).cell(report.liability).cell(e.mean).cell(e.standard_error).cell(z);
      csv.end_row();
    }
    csv.close();
  }

  const bool ok = worst <= kZLimit;
  std::ostringstream text;
  text << "compared points: " << tested << '\n'
       << "within 3 SE: " << within3 << '\n'
       << "max |z|: " << format_double(worst) << '\n'
       << (ok ? "PASS" : "FAIL") << '\n';
  write_text(ctx.file("compare_summary.txt"), text.str());
  if (!ctx.quiet) ctx.out << text.str();
  return ok ? kSuccess : kComparisonFailure;
}

int cmd_g82_check(const Context& ctx) {
  const ScenarioConfig& c = ctx.config;
  const G82Inputs inputs = build_g82_inputs(c);
  const MaritalSolution age = g82_solve(inputs, c.grid, solver_options(c));
  const IntensitySet set = g82_as_general(inputs, build_intensities(c).death);
  const MaritalSolution general = solve_marital(set, c.grid, solver_options(c));

  const auto ga = age.marriage_probability_nodes();
  const auto gg = general.marriage_probability_nodes();
  double dg = 0.0;
  double df = 0.0;
  CsvWriter csv(ctx.file("g82_check.csv"), {"x", "g_age", "g_general", "abs_diff_g", "max_abs_diff_f"});
  for (std::size_t i = 0; i < ga.size(); ++i) {
    double row_df = 0.0;
    if (ga[i] >= 1e-8 && gg[i] >= 1e-8) {
      for (std::size_t j = 0; j < c.grid.n_y(); ++j) {
        const double fa = age.joint_density()(i, j) / ga[i];
        const double fg = general.joint_density()(i, j) / gg[i];
        row_df = std::max(row_df, std::abs(fa - fg));
      }
    }
    dg = std::max(dg, std::abs(ga[i] - gg[i]));
    df = std::max(df, row_df);
    csv.cell(c.grid.t(i)).cell(ga[i]).cell(gg[i]).cell(std::abs(ga[i] - gg[i])).cell(row_df);
    csv.end_row();
  }
  csv.close();
  const bool ok = dg <= 1e-6 && df <= 1e-5;
  std::ostringstream text;
  text << "max |g_age - g_general|: " << format_double(dg) << '\n'
       << "max |f_age - f_general|: " << format_double(df) << '\n'
       << (ok ? "PASS" : "FAIL") << '\n';
  write_text(ctx.file("g82_check.txt"), text.str());
  if (!ctx.quiet) ctx.out << text.str();
  return ok ? kSuccess : kComparisonFailure;
}

}  // namespace

int execute(const RunOptions& options, std::ostream& out, std::ostream& err) {
  try {
    Context ctx{load_config(options.config), options.out, out, options.quiet};
    if (options.step) ctx.config.grid.step = *options.step;
    if (options.paths) ctx.config.simulation.n_paths = *options.paths;
    if (options.seed) ctx.config.simulation.seed = *options.seed;
    ctx.config.grid.validate();
    fs::create_directories(ctx.out_dir);
    write_text(ctx.file("config_echo.yaml"), echo_config(ctx.config));

    if (options.command == "solve-marital") return cmd_solve(ctx);
    if (options.command == "value") return cmd_value(ctx);
    if (options.command == "simulate") return cmd_simulate(ctx);
    if (options.command == "compare") return cmd_compare(ctx);
    if (options.command == "g82-check") return cmd_g82_check(ctx);
    err << "error: unknown command '" << options.command << "'\n";
    return kValidationError;
  } catch (const ConfigError& e) {
    err << "config error: " << options.config.string() << ": " << e.what() << '\n';
    return kValidationError;
  } catch (const TruncationError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const UndefinedConditionalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::logic_error& e) {
    err << "invalid input: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalError;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spouse's pension marital model, valuation and simulation"};
  app.require_subcommand(1);
  RunOptions options;
  std::uint64_t paths = 0;
  std::uint64_t seed = 0;
  double step = 0.0;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"solve-marital", "Solve for the marriage probability and spouse-age density"},
      {"value", "Cashflows and liabilities for the configured policies"},
      {"simulate", "Monte Carlo estimates of the marital process and policy values"},
      {"compare", "Analytic versus Monte Carlo, with z-scores"},
      {"g82-check", "Age-parameterised solver against the general solver"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", options.config, "Scenario file (YAML)")->required();
    sub->add_option("--out", options.out, "Output directory")->capture_default_str();
    sub->add_option("--paths", paths, "Number of simulated paths");
    sub->add_option("--seed", seed, "Random seed");
    sub->add_option("--step", step, "Grid step override");
    sub->add_flag("--quiet", options.quiet, "Suppress the summary on stdout");
    sub->callback([&options, name = name] { options.command = name; });
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  }
  for (CLI::App* sub : app.get_subcommands()) {
    if (sub->count("--paths")) options.paths = paths;
    if (sub->count("--seed")) options.seed = seed;
    if (sub->count("--step")) options.step = step;
  }
  return execute(options, out, err);
}

}  // namespace pension::cli
