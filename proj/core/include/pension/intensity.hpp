#pragma once

#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "pension/grid.hpp"

namespace pension {

struct ConstantRate {
  double value = 0.0;
};

struct PiecewiseLinearRate {
  std::vector<double> knots;   // strictly increasing
  std::vector<double> values;  // one per knot, flat beyond the ends
};

/// alpha + beta * exp(growth * t)
struct GompertzMakehamRate {
  double alpha = 0.0;
  double beta = 0.0;
  double growth = 0.0;
};

/// A non-negative rate per year on [0, t_max].
///
/// Constant and piecewise-linear curves integrate in closed form. A
/// Gompertz-Makeham curve integrates the piecewise-linear interpolant of its
/// rate on the lattice k * quadrature_step, so the hazard is exactly additive
/// over adjacent intervals and shares the trapezoid error order of the rest
/// of the engine.
class IntensityCurve {
 public:
  using Parameterization = std::variant<ConstantRate, PiecewiseLinearRate, GompertzMakehamRate>;

  static IntensityCurve constant(double value, double t_max = kDefaultHorizon);
  static IntensityCurve piecewise_linear(std::vector<double> knots, std::vector<double> values,
                                         double t_max = kDefaultHorizon);
  static IntensityCurve gompertz_makeham(double alpha, double beta, double growth,
                                         double t_max = kDefaultHorizon,
                                         double quadrature_step = kDefaultStep);

  double rate(double t) const;
  double integrated_hazard(double a, double b) const;

  /// Curve t -> rate(offset + t), with domain [0, t_max - offset].
  IntensityCurve shifted(double offset) const;

  /// Same parameterization on a different domain / lattice.
  IntensityCurve with_domain(double t_max, std::optional<double> quadrature_step = {}) const;

  double t_max() const { return t_max_; }
  double quadrature_step() const { return step_; }
  const Parameterization& parameterization() const { return param_; }
  bool is_identically_zero() const;
  bool is_constant() const { return std::holds_alternative<ConstantRate>(param_); }

 private:
  IntensityCurve(Parameterization p, double t_max, double step);
  void check_domain(double t) const;
  double lattice_hazard_to(double t) const;

  Parameterization param_;
  double t_max_ = kDefaultHorizon;
  double step_ = kDefaultStep;
  // Gompertz-Makeham only: cumulative hazard at lattice nodes.
  std::shared_ptr<const std::vector<double>> cumulative_;
  std::shared_ptr<const std::vector<double>> lattice_rates_;
};

/// q(t, y) = improvement(t) * base(y). Without an improvement factor the
/// surface is time independent.
class MortalitySurface {
 public:
  explicit MortalitySurface(IntensityCurve base, std::optional<IntensityCurve> improvement = {});

  double rate(double t, double y) const;
  const IntensityCurve& base() const { return base_; }
  const std::optional<IntensityCurve>& improvement() const { return improvement_; }
  bool time_independent() const { return !improvement_.has_value(); }
  bool is_identically_zero() const { return base_.is_identically_zero(); }

 private:
  IntensityCurve base_;
  std::optional<IntensityCurve> improvement_;
};

struct UniformAges {
  double lo = 0.0;
  double hi = 0.0;
  double lo_slope = 0.0;  // bounds may drift linearly with time
  double hi_slope = 0.0;
};

/// Normal(t + offset, sd) truncated to [0, inf).
struct TruncatedNormalAges {
  double offset = 0.0;
  double sd = 1.0;
};

/// phi(y | t) on a rectangular (times x ages) table, bilinear in between,
/// zero beyond the age range, clamped in time.
struct TabulatedAges {
  std::vector<double> times;
  std::vector<double> ages;
  std::vector<std::vector<double>> values;  // values[time][age]
};

/// Density of the spouse's initial age y for a marriage at time t.
class AgeAtMarriageDensity {
 public:
  using Parameterization = std::variant<UniformAges, TruncatedNormalAges, TabulatedAges>;

  static AgeAtMarriageDensity uniform(double lo, double hi, double lo_slope = 0.0,
                                      double hi_slope = 0.0);
  static AgeAtMarriageDensity truncated_normal(double offset, double sd);
  static AgeAtMarriageDensity tabulated(TabulatedAges table);

  double density(double y, double t) const;
  /// Age above which the density is zero or negligible (< 1e-300 for the
  /// normal), used as the upper quadrature limit.
  double support_upper(double t) const;
  double support_lower(double t) const;

  /// phi_shifted(y | t) = phi(y | t + offset); used to turn an age-indexed
  /// density into a time-indexed one for an insured aged `offset` at t = 0.
  AgeAtMarriageDensity shifted(double offset) const;

  const Parameterization& parameterization() const { return param_; }
  double time_shift() const { return shift_; }

 private:
  explicit AgeAtMarriageDensity(Parameterization p) : param_(std::move(p)) {}
  Parameterization param_;
  double shift_ = 0.0;
};

/// Density of the insured's time of death. Either tabulated knots
/// (piecewise linear, zero outside) or derived from a mortality curve as
/// q(u) exp(-int_0^u q).
class DeathDensity {
 public:
  static DeathDensity tabulated(std::vector<double> knots, std::vector<double> values,
                                double quadrature_step = kDefaultStep);
  static DeathDensity from_mortality(IntensityCurve mortality,
                                     double quadrature_step = kDefaultStep);

  double density(double u) const;
  /// P(T <= u), by trapezoid accumulation on the lattice.
  double cumulative(double u) const;
  double total_mass() const { return cdf_.empty() ? 0.0 : cdf_.back(); }
  double t_max() const { return t_max_; }
  double quadrature_step() const { return step_; }
  std::span<const double> cdf_nodes() const { return cdf_; }

  const std::optional<IntensityCurve>& mortality() const { return mortality_; }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }

 private:
  DeathDensity() = default;
  void build_cdf();

  std::optional<IntensityCurve> mortality_;
  std::vector<double> knots_;
  std::vector<double> values_;
  double t_max_ = 0.0;
  double step_ = kDefaultStep;
  std::vector<double> cdf_;
};

/// The primitives of the marital model: marriage and divorce intensities,
/// spouse mortality, age-at-marriage density and the insured's death density.
struct IntensitySet {
  IntensityCurve gamma;
  IntensityCurve sigma;
  MortalitySurface spouse_mortality;
  AgeAtMarriageDensity age_at_marriage;
  DeathDensity death;
};

/// True iff |int phi(y|t) dy - 1| <= tol with the trapezoid rule at `step`.
bool validate_age_density(const AgeAtMarriageDensity& phi, double t, double tol,
                          double step = kDefaultStep);

/// Checks every component on the grid. Throws ArgumentError with a
/// description of the first violated invariant.
void validate(const IntensitySet& set, const GridSpec& grid, double density_tol = 1e-4);

}  // namespace pension
