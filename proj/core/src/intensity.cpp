#include "pension/intensity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pension/errors.hpp"

namespace pension {

namespace {

double domain_slack(double t_max) { return 1e-9 * std::max(1.0, std::abs(t_max)); }

// Integral over [a, b] of the piecewise-linear curve with flat extension.
double piecewise_integral(const PiecewiseLinearRate& p, double a, double b) {
  const auto& x = p.knots;
  const auto& v = p.values;
  const std::size_t n = x.size();
  double sum = 0.0;
  // Left flat part.
  if (a < x.front()) sum += v.front() * (std::min(b, x.front()) - a);
  // Right flat part.
  if (b > x.back()) sum += v.back() * (b - std::max(a, x.back()));
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double lo = std::max(a, x[k]);
    const double hi = std::min(b, x[k + 1]);
    if (hi <= lo) continue;
    const double slope = (v[k + 1] - v[k]) / (x[k + 1] - x[k]);
    const double r_lo = v[k] + slope * (lo - x[k]);
    const double r_hi = v[k] + slope * (hi - x[k]);
    sum += 0.5 * (r_lo + r_hi) * (hi - lo);
  }
  return sum;
}

double piecewise_value(const PiecewiseLinearRate& p, double t) {
  const auto& x = p.knots;
  const auto& v = p.values;
  if (t <= x.front()) return v.front();
  if (t >= x.back()) return v.back();
  const auto it = std::upper_bound(x.begin(), x.end(), t);
  const auto k = static_cast<std::size_t>(it - x.begin()) - 1;
  const double w = (t - x[k]) / (x[k + 1] - x[k]);
  return (1.0 - w) * v[k] + w * v[k + 1];
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace

// ---------------------------------------------------------------------------
// IntensityCurve

IntensityCurve::IntensityCurve(Parameterization p, double t_max, double step)
    : param_(std::move(p)), t_max_(t_max), step_(step) {
  if (!(t_max_ > 0.0) || !std::isfinite(t_max_)) throw ArgumentError("curve domain must be positive");
  if (!(step_ > 0.0)) throw ArgumentError("curve quadrature step must be positive");

  if (const auto* c = std::get_if<ConstantRate>(&param_)) {
    if (!(c->value >= 0.0) || !std::isfinite(c->value))
      throw ArgumentError("constant rate must be finite and non-negative");
  } else if (const auto* p = std::get_if<PiecewiseLinearRate>(&param_)) {
    if (p->knots.empty() || p->knots.size() != p->values.size())
      throw ArgumentError("piecewise-linear curve needs matching non-empty knots and values");
    for (std::size_t k = 1; k < p->knots.size(); ++k)
      if (!(p->knots[k] > p->knots[k - 1]))
        throw ArgumentError("piecewise-linear knots must be strictly increasing");
    for (double v : p->values)
      if (!(v >= 0.0) || !std::isfinite(v))
        throw ArgumentError("piecewise-linear values must be finite and non-negative");
  } else {
    const auto& gm = std::get<GompertzMakehamRate>(param_);
    if (!(gm.alpha >= 0.0) || !(gm.beta >= 0.0) || !std::isfinite(gm.growth))
      throw ArgumentError("Gompertz-Makeham needs alpha >= 0, beta >= 0 and finite growth");
    const auto cells = static_cast<std::size_t>(std::ceil(t_max_ / step_ - 1e-9));
    std::vector<double> rates(cells + 1);
    for (std::size_t k = 0; k <= cells; ++k)
      rates[k] = gm.alpha + gm.beta * std::exp(gm.growth * static_cast<double>(k) * step_);
    auto cumulative = cumulative_trapezoid(rates, step_);
    lattice_rates_ = std::make_shared<const std::vector<double>>(std::move(rates));
    cumulative_ = std::make_shared<const std::vector<double>>(std::move(cumulative));
  }
}

IntensityCurve IntensityCurve::constant(double value, double t_max) {
  return IntensityCurve(ConstantRate{value}, t_max, kDefaultStep);
}

IntensityCurve IntensityCurve::piecewise_linear(std::vector<double> knots,
                                                std::vector<double> values, double t_max) {
  return IntensityCurve(PiecewiseLinearRate{std::move(knots), std::move(values)}, t_max,
                        kDefaultStep);
}

IntensityCurve IntensityCurve::gompertz_makeham(double alpha, double beta, double growth,
                                                double t_max, double quadrature_step) {
  return IntensityCurve(GompertzMakehamRate{alpha, beta, growth}, t_max, quadrature_step);
}

void IntensityCurve::check_domain(double t) const {
  if (!(t >= -domain_slack(t_max_)) || t > t_max_ + domain_slack(t_max_)) {
    std::ostringstream msg;
    msg << "time " << t << " outside curve domain [0, " << t_max_ << "]";
    throw DomainError(msg.str());
  }
}

double IntensityCurve::rate(double t) const {
  check_domain(t);
  return std::visit(
      [t](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, ConstantRate>) {
          return p.value;
        } else if constexpr (std::is_same_v<P, PiecewiseLinearRate>) {
          return piecewise_value(p, t);
        } else {
          return p.alpha + p.beta * std::exp(p.growth * t);
        }
      },
      param_);
}

double IntensityCurve::lattice_hazard_to(double t) const {
  const auto& cum = *cumulative_;
  const auto& rates = *lattice_rates_;
  t = std::clamp(t, 0.0, static_cast<double>(cum.size() - 1) * step_);
  const double pos = t / step_;
  auto k = static_cast<std::size_t>(std::floor(pos));
  if (k + 1 >= cum.size()) return cum.back();
  const double w = pos - static_cast<double>(k);
  const double r_t = (1.0 - w) * rates[k] + w * rates[k + 1];
  return cum[k] + 0.5 * (rates[k] + r_t) * (t - static_cast<double>(k) * step_);
}

double IntensityCurve::integrated_hazard(double a, double b) const {
  if (a > b) throw ArgumentError("integrated_hazard: a > b");
  check_domain(a);
  check_domain(b);
  if (a == b) return 0.0;
  return std::visit(
      [&](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, ConstantRate>) {
          return p.value * (b - a);
        } else if constexpr (std::is_same_v<P, PiecewiseLinearRate>) {
          return piecewise_integral(p, a, b);
        } else {
          return std::max(0.0, lattice_hazard_to(b) - lattice_hazard_to(a));
        }
      },
      param_);
}

IntensityCurve IntensityCurve::shifted(double offset) const {
  if (!(offset >= 0.0) || offset >= t_max_) throw ArgumentError("shift outside curve domain");
  const double new_max = t_max_ - offset;
  return std::visit(
      [&](const auto& p) -> IntensityCurve {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, ConstantRate>) {
          return IntensityCurve(p, new_max, step_);
        } else if constexpr (std::is_same_v<P, PiecewiseLinearRate>) {
          PiecewiseLinearRate q = p;
          for (double& k : q.knots) k -= offset;
          return IntensityCurve(std::move(q), new_max, step_);
        } else {
          return IntensityCurve(
              GompertzMakehamRate{p.alpha, p.beta * std::exp(p.growth * offset), p.growth},
              new_max, step_);
        }
      },
      param_);
}

IntensityCurve IntensityCurve::with_domain(double t_max, std::optional<double> quadrature_step) const {
  return IntensityCurve(param_, t_max, quadrature_step.value_or(step_));
}

bool IntensityCurve::is_identically_zero() const {
  return std::visit(
      [](const auto& p) -> bool {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, ConstantRate>) {
          return p.value == 0.0;
        } else if constexpr (std::is_same_v<P, PiecewiseLinearRate>) {
          return std::all_of(p.values.begin(), p.values.end(), [](double v) { return v == 0.0; });
        } else {
          return p.alpha == 0.0 && p.beta == 0.0;
        }
      },
      param_);
}

// ---------------------------------------------------------------------------
// MortalitySurface

MortalitySurface::MortalitySurface(IntensityCurve base, std::optional<IntensityCurve> improvement)
    : base_(std::move(base)), improvement_(std::move(improvement)) {}

double MortalitySurface::rate(double t, double y) const {
  if (t < 0.0 || y < 0.0) {
    std::ostringstream msg;
    msg << "mortality surface evaluated at negative (t, y) = (" << t << ", " << y << ")";
    throw DomainError(msg.str());
  }
  const double base = base_.rate(y);
  return improvement_ ? improvement_->rate(t) * base : base;
}

// ---------------------------------------------------------------------------
// AgeAtMarriageDensity

AgeAtMarriageDensity AgeAtMarriageDensity::uniform(double lo, double hi, double lo_slope,
                                                   double hi_slope) {
  if (!(hi > lo) || lo < 0.0) throw ArgumentError("uniform age density needs 0 <= lo < hi");
  if (hi_slope < lo_slope) throw ArgumentError("uniform age density bounds must not cross");
  return AgeAtMarriageDensity(UniformAges{lo, hi, lo_slope, hi_slope});
}

AgeAtMarriageDensity AgeAtMarriageDensity::truncated_normal(double offset, double sd) {
  if (!(sd > 0.0)) throw ArgumentError("truncated normal age density needs sd > 0");
  return AgeAtMarriageDensity(TruncatedNormalAges{offset, sd});
}

AgeAtMarriageDensity AgeAtMarriageDensity::tabulated(TabulatedAges table) {
  if (table.times.empty() || table.ages.size() < 2)
    throw ArgumentError("tabulated age density needs >= 1 time and >= 2 ages");
  if (table.values.size() != table.times.size())
    throw ArgumentError("tabulated age density: one row per time required");
  for (std::size_t k = 1; k < table.times.size(); ++k)
    if (!(table.times[k] > table.times[k - 1]))
      throw ArgumentError("tabulated age density: times must be strictly increasing");
  for (std::size_t k = 1; k < table.ages.size(); ++k)
    if (!(table.ages[k] > table.ages[k - 1]))
      throw ArgumentError("tabulated age density: ages must be strictly increasing");
  if (table.ages.front() < 0.0) throw ArgumentError("tabulated age density: negative age");
  for (const auto& row : table.values) {
    if (row.size() != table.ages.size())
      throw ArgumentError("tabulated age density: row length must match ages");
    for (double v : row)
      if (!(v >= 0.0) || !std::isfinite(v))
        throw ArgumentError("tabulated age density: values must be finite and non-negative");
  }
  return AgeAtMarriageDensity(std::move(table));
}

namespace {

double tabulated_row_value(const TabulatedAges& tab, std::size_t row, double y) {
  const auto& a = tab.ages;
  if (y < a.front() || y > a.back()) return 0.0;
  // Half value at the table edges, matching the uniform case.
  if (y == a.front()) return 0.5 * tab.values[row].front();
  const auto it = std::upper_bound(a.begin(), a.end(), y);
  if (it == a.end()) return 0.5 * tab.values[row].back();
  const auto k = static_cast<std::size_t>(it - a.begin()) - 1;
  const double w = (y - a[k]) / (a[k + 1] - a[k]);
  return (1.0 - w) * tab.values[row][k] + w * tab.values[row][k + 1];
}

constexpr double kNormalTail = 38.0;

}  // namespace

double AgeAtMarriageDensity::density(double y, double t) const {
  if (y < 0.0) return 0.0;
  const double ts = t + shift_;
  return std::visit(
      [&](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, UniformAges>) {
          const double lo = p.lo + p.lo_slope * ts;
          const double hi = p.hi + p.hi_slope * ts;
          const double eps = 1e-9 * std::max(1.0, std::abs(hi));
          // Midpoint value at the two jumps, so the trapezoid rule is exact
          // when the bounds sit on grid nodes.
          if (y < lo - eps || y > hi + eps) return 0.0;
          const bool edge = std::abs(y - lo) <= eps || std::abs(y - hi) <= eps;
          return (edge ? 0.5 : 1.0) / (hi - lo);
        } else if constexpr (std::is_same_v<P, TruncatedNormalAges>) {
          const double mean = ts + p.offset;
          const double z = (y - mean) / p.sd;
          const double mass = normal_cdf(mean / p.sd);
          if (mass <= 0.0) return 0.0;
          return std::exp(-0.5 * z * z) / (p.sd * std::sqrt(2.0 * std::numbers::pi) * mass);
        } else {
          const auto& tt = p.times;
          if (ts <= tt.front()) return tabulated_row_value(p, 0, y);
          if (ts >= tt.back()) return tabulated_row_value(p, tt.size() - 1, y);
          const auto it = std::upper_bound(tt.begin(), tt.end(), ts);
          const auto k = static_cast<std::size_t>(it - tt.begin()) - 1;
          const double w = (ts - tt[k]) / (tt[k + 1] - tt[k]);
          return (1.0 - w) * tabulated_row_value(p, k, y) + w * tabulated_row_value(p, k + 1, y);
        }
      },
      param_);
}

double AgeAtMarriageDensity::support_upper(double t) const {
  const double ts = t + shift_;
  return std::visit(
      [&](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, UniformAges>) {
          return p.hi + p.hi_slope * ts;
        } else if constexpr (std::is_same_v<P, TruncatedNormalAges>) {
          return std::max(0.0, ts + p.offset + kNormalTail * p.sd);
        } else {
          return p.ages.back();
        }
      },
      param_);
}

double AgeAtMarriageDensity::support_lower(double t) const {
  const double ts = t + shift_;
  return std::visit(
      [&](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, UniformAges>) {
          return std::max(0.0, p.lo + p.lo_slope * ts);
        } else if constexpr (std::is_same_v<P, TruncatedNormalAges>) {
          return std::max(0.0, ts + p.offset - kNormalTail * p.sd);
        } else {
          return p.ages.front();
        }
      },
      param_);
}

AgeAtMarriageDensity AgeAtMarriageDensity::shifted(double offset) const {
  AgeAtMarriageDensity out = *this;
  out.shift_ += offset;
  return out;
}

// ---------------------------------------------------------------------------
// DeathDensity

DeathDensity DeathDensity::tabulated(std::vector<double> knots, std::vector<double> values,
                                     double quadrature_step) {
  if (knots.size() < 2 || knots.size() != values.size())
    throw ArgumentError("tabulated death density needs >= 2 matching knots and values");
  if (knots.front() < 0.0) throw ArgumentError("tabulated death density: negative time");
  for (std::size_t k = 1; k < knots.size(); ++k)
    if (!(knots[k] > knots[k - 1]))
      throw ArgumentError("tabulated death density: knots must be strictly increasing");
  for (double v : values)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ArgumentError("tabulated death density: values must be finite and non-negative");
  DeathDensity d;
  d.knots_ = std::move(knots);
  d.values_ = std::move(values);
  d.t_max_ = d.knots_.back();
  d.step_ = quadrature_step;
  d.build_cdf();
  if (d.total_mass() > 1.0 + 1e-6)
    throw ArgumentError("tabulated death density integrates to more than one");
  return d;
}

DeathDensity DeathDensity::from_mortality(IntensityCurve mortality, double quadrature_step) {
  DeathDensity d;
  d.t_max_ = mortality.t_max();
  d.step_ = quadrature_step;
  d.mortality_ = std::move(mortality);
  d.build_cdf();
  return d;
}

double DeathDensity::density(double u) const {
  if (u < 0.0) throw DomainError("death density evaluated at negative time");
  if (u > t_max_ + domain_slack(t_max_)) return 0.0;
  u = std::min(u, t_max_);
  if (mortality_) return mortality_->rate(u) * std::exp(-mortality_->integrated_hazard(0.0, u));
  if (u < knots_.front() || u > knots_.back()) return 0.0;
  return piecewise_value(PiecewiseLinearRate{knots_, values_}, u);
}

void DeathDensity::build_cdf() {
  const auto cells = static_cast<std::size_t>(std::ceil(t_max_ / step_ - 1e-9));
  std::vector<double> dens(cells + 1);
  for (std::size_t k = 0; k <= cells; ++k)
    dens[k] = density(std::min(static_cast<double>(k) * step_, t_max_));
  cdf_ = cumulative_trapezoid(dens, step_);
}

double DeathDensity::cumulative(double u) const {
  if (u <= 0.0) return 0.0;
  return interpolate(cdf_, step_, u);
}

// ---------------------------------------------------------------------------
// Validation

bool validate_age_density(const AgeAtMarriageDensity& phi, double t, double tol, double step) {
  const double upper = phi.support_upper(t);
  const auto n = static_cast<std::size_t>(std::ceil(upper / step)) + 1;
  std::vector<double> values(n + 1);
  for (std::size_t j = 0; j <= n; ++j) values[j] = phi.density(static_cast<double>(j) * step, t);
  const double mass = trapezoid(values, step);
  return std::abs(mass - 1.0) <= tol;
}

void validate(const IntensitySet& set, const GridSpec& grid, double density_tol) {
  grid.validate();
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ArgumentError(what);
  };
  const double slack = domain_slack(grid.t_max);
  need(set.gamma.t_max() + slack >= grid.t_max, "gamma domain shorter than grid.t_max");
  need(set.sigma.t_max() + slack >= grid.t_max, "sigma domain shorter than grid.t_max");
  need(set.spouse_mortality.base().t_max() + slack >= grid.y_max,
       "spouse mortality age domain shorter than grid.y_max");
  if (const auto& rho = set.spouse_mortality.improvement())
    need(rho->t_max() + slack >= grid.t_max, "longevity improvement domain shorter than grid.t_max");

  const std::size_t n_t = grid.n_t();
  const std::size_t n_y = grid.n_y();
  std::vector<double> column(n_y);
  for (std::size_t i = 0; i < n_t; ++i) {
    const double t = grid.t(i);
    for (std::size_t j = 0; j < n_y; ++j) column[j] = set.age_at_marriage.density(grid.y(j), t);
    const double mass = trapezoid(column, grid.step);
    if (std::abs(mass - 1.0) > density_tol) {
      std::ostringstream msg;
      msg << "age-at-marriage density integrates to " << mass << " on [0, y_max] at t = " << t;
      throw ArgumentError(msg.str());
    }
  }
}

}  // namespace pension
