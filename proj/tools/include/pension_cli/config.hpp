#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pension/g82.hpp"
#include "pension/grid.hpp"
#include "pension/intensity.hpp"
#include "pension/marital_solver.hpp"
#include "pension/payments.hpp"
#include "pension/simulator.hpp"
#include "pension/valuation.hpp"

namespace pension::cli {

/// Malformed or inconsistent scenario file. what() carries the position.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line = -1, int column = -1);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// The *Spec structs mirror the file one to one so that a scenario can be
// written back out and re-read without loss.

struct CurveSpec {
  std::string type = "constant";  // constant | piecewise_linear | gompertz_makeham
  double value = 0.0;
  std::vector<double> knots;
  std::vector<double> values;
  double alpha = 0.0;
  double beta = 0.0;
  double growth = 0.0;
  friend bool operator==(const CurveSpec&, const CurveSpec&) = default;
};

struct MortalitySpec {
  CurveSpec base;
  std::optional<CurveSpec> improvement;
  friend bool operator==(const MortalitySpec&, const MortalitySpec&) = default;
};

struct AgeDensitySpec {
  std::string type = "uniform";  // uniform | truncated_normal | tabulated
  double lo = 0.0;
  double hi = 0.0;
  double lo_slope = 0.0;
  double hi_slope = 0.0;
  double offset = 0.0;
  double sd = 1.0;
  std::vector<double> times;
  std::vector<double> ages;
  std::vector<std::vector<double>> table;
  friend bool operator==(const AgeDensitySpec&, const AgeDensitySpec&) = default;
};

struct DeathSpec {
  std::string type = "mortality";  // mortality | tabulated
  CurveSpec mortality;
  std::vector<double> knots;
  std::vector<double> values;
  friend bool operator==(const DeathSpec&, const DeathSpec&) = default;
};

struct PolicyConfig {
  std::string name;
  std::string kind;  // lifelong_annuity | terminating_annuity | lump_sum_at_age
  double amount = 1.0;
  double age_limit = 0.0;
  std::optional<MortalitySpec> post_death_mortality;
  friend bool operator==(const PolicyConfig&, const PolicyConfig&) = default;
};

struct MemberConfig {
  double initial_age = 0.0;
  std::string policy;
  double weight = 1.0;
  friend bool operator==(const MemberConfig&, const MemberConfig&) = default;
};

/// Members value age-indexed assumptions: gamma, sigma and the age density
/// in `intensities` are read as functions of the insured's age.
struct PortfolioConfig {
  CurveSpec insured_mortality;
  double max_age = kDefaultHorizon;
  std::vector<MemberConfig> members;
  friend bool operator==(const PortfolioConfig&, const PortfolioConfig&) = default;
};

struct SimulationConfig {
  std::uint64_t n_paths = 100000;
  std::uint64_t seed = 1;
  std::vector<double> g_times;
  std::vector<double> f_times;
  double bin_width = 1.0;
  int tracked_layers = 4;
  friend bool operator==(const SimulationConfig&, const SimulationConfig&) = default;
};

struct ScenarioConfig {
  std::string mode = "general";  // general | g82
  double a_min = 0.0;            // g82 mode only
  GridSpec grid;
  int nu_cap = kDefaultNuCap;
  double epsilon = kDefaultTruncationEpsilon;
  CurveSpec gamma;
  CurveSpec sigma;
  MortalitySpec spouse_mortality;
  AgeDensitySpec age_at_marriage;
  DeathSpec death;
  CurveSpec short_rate;
  std::vector<PolicyConfig> policies;
  std::optional<PortfolioConfig> portfolio;
  SimulationConfig simulation;
  std::vector<double> report_f_times;
  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;

  bool g82() const { return mode == "g82"; }
};

ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);
/// YAML that parse_config maps back to an equal ScenarioConfig.
std::string echo_config(const ScenarioConfig& config);

// Builders turning specs into engine objects on the scenario's domains.

IntensityCurve build_curve(const CurveSpec& spec, double t_max, double step);
MortalitySurface build_mortality(const MortalitySpec& spec, double age_domain, double t_max,
                                 double step);
AgeAtMarriageDensity build_age_density(const AgeDensitySpec& spec);
IntensitySet build_intensities(const ScenarioConfig& config);
G82Inputs build_g82_inputs(const ScenarioConfig& config);
std::vector<PolicySpec> build_policies(const ScenarioConfig& config);
ShortRate build_short_rate(const ScenarioConfig& config);
SolverOptions solver_options(const ScenarioConfig& config);
SimulationSettings simulation_settings(const ScenarioConfig& config);

}  // namespace pension::cli
