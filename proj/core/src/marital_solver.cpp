#include "pension/marital_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pension/errors.hpp"
#include "pension/parallel.hpp"

namespace pension {

double age_weight(std::size_t j, std::size_t n_y, double step) {
  return (j == 0 || j + 1 == n_y) ? 0.5 * step : step;
}

MaritalKernel MaritalKernel::build(const IntensitySet& intensities, const GridSpec& grid,
                                   unsigned threads) {
  grid.validate();
  MaritalKernel k;
  k.grid = grid;
  k.threads = threads == 0 ? worker_count() : threads;
  const std::size_t n_t = grid.n_t();
  const std::size_t n_y = grid.n_y();

  k.gamma.resize(n_t);
  k.sigma.resize(n_t);
  k.gamma_decay.assign(n_t, 1.0);
  k.gamma_survival.resize(n_t);
  std::vector<double> sigma_step(n_t, 0.0);
  for (std::size_t i = 0; i < n_t; ++i) {
    const double t = grid.t(i);
    k.gamma[i] = intensities.gamma.rate(t);
    k.sigma[i] = intensities.sigma.rate(t);
    k.gamma_survival[i] = std::exp(-intensities.gamma.integrated_hazard(0.0, t));
    if (i > 0) {
      const double prev = grid.t(i - 1);
      k.gamma_decay[i] = std::exp(-intensities.gamma.integrated_hazard(prev, t));
      sigma_step[i] = intensities.sigma.integrated_hazard(prev, t);
    }
  }

  k.spouse_rate = Grid2D(n_t, n_y);
  k.age_density = Grid2D(n_t, n_y);
  k.married_decay = Grid2D(n_t, n_y, 1.0);
  parallel_for(n_t, k.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double t = grid.t(i);
      for (std::size_t j = 0; j < n_y; ++j) {
        k.spouse_rate(i, j) = intensities.spouse_mortality.rate(t, grid.y(j));
        k.age_density(i, j) = intensities.age_at_marriage.density(grid.y(j), t);
      }
    }
  });
  const double half = 0.5 * grid.step;
  for (std::size_t i = 1; i < n_t; ++i)
    for (std::size_t j = 1; j < n_y; ++j)
      k.married_decay(i, j) =
          std::exp(-(sigma_step[i] + half * (k.spouse_rate(i - 1, j - 1) + k.spouse_rate(i, j))));
  return k;
}

Grid2D compute_g_nu_layer(std::span<const double> u_prev, const MaritalKernel& kernel) {
  const std::size_t n_t = kernel.grid.n_t();
  const std::size_t n_y = kernel.grid.n_y();
  if (u_prev.size() != n_t) throw ArgumentError("compute_g_nu_layer: u_prev does not match grid");
  const double half = 0.5 * kernel.grid.step;

  // Marriage inflow rate u_{nu-1}(v) gamma(v).
  std::vector<double> inflow(n_t);
  for (std::size_t k = 0; k < n_t; ++k) inflow[k] = u_prev[k] * kernel.gamma[k];

  Grid2D layer(n_t, n_y);
  // A spouse married at (v, y + v - t) who is still married at (t, y) lies on
  // the diagonal j - i = const. Walking each diagonal once turns the
  // trapezoid over v into a first-order recurrence:
  //   T_i = D_i (T_{i-1} + h c_{i-1}) + h c_i,   h = step / 2,
  // where D_i is the one-step survival against divorce and spouse death.
  // Diagonals start at (0, j0) or, for spouses born after t = 0, at (i0, 0);
  // either way the marriage window is empty there.
  const std::size_t n_diag = n_t + n_y - 1;
  parallel_for(n_diag, kernel.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t d = begin; d < end; ++d) {
      std::size_t i = d < n_y ? 0 : d - n_y + 1;
      std::size_t j = d < n_y ? n_y - 1 - d : 0;
      double c_prev = inflow[i] * kernel.age_density(i, j);
      double acc = 0.0;
      layer(i, j) = acc;
      for (++i, ++j; i < n_t && j < n_y; ++i, ++j) {
        const double c = inflow[i] * kernel.age_density(i, j);
        acc = kernel.married_decay(i, j) * (acc + half * c_prev) + half * c;
        layer(i, j) = acc;
        c_prev = c;
      }
    }
  });
  return layer;
}

std::vector<double> compute_u_nu_layer(const Grid2D& g_nu, const MaritalKernel& kernel) {
  const std::size_t n_t = kernel.grid.n_t();
  const std::size_t n_y = kernel.grid.n_y();
  if (g_nu.n_t() != n_t || g_nu.n_y() != n_y)
    throw ArgumentError("compute_u_nu_layer: layer does not match grid");
  const double step = kernel.grid.step;

  // Exit flow out of the married state at each time.
  std::vector<double> exit(n_t);
  for (std::size_t k = 0; k < n_t; ++k) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n_y; ++j)
      sum += age_weight(j, n_y, step) * g_nu(k, j) * (kernel.sigma[k] + kernel.spouse_rate(k, j));
    exit[k] = sum;
  }
  std::vector<double> u(n_t, 0.0);
  const double half = 0.5 * step;
  for (std::size_t i = 1; i < n_t; ++i)
    u[i] = kernel.gamma_decay[i] * (u[i - 1] + half * exit[i - 1]) + half * exit[i];
  return u;
}

namespace {

std::vector<double> age_integral(const Grid2D& grid, double step) {
  std::vector<double> out(grid.n_t());
  for (std::size_t i = 0; i < grid.n_t(); ++i) {
    double sum = 0.0;
    const auto row = grid.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) sum += age_weight(j, row.size(), step) * row[j];
    out[i] = sum;
  }
  return out;
}

}  // namespace

MaritalSolution solve_marital(const IntensitySet& intensities, const GridSpec& grid,
                              const SolverOptions& options) {
  if (options.nu_cap < 1) throw ArgumentError("nu_cap must be at least 1");
  if (!(options.epsilon > 0.0)) throw ArgumentError("truncation epsilon must be positive");
  const MaritalKernel kernel = MaritalKernel::build(intensities, grid, options.threads);

  std::vector<double> u0 = kernel.gamma_survival;
  Grid2D joint(grid.n_t(), grid.n_y());
  std::vector<MaritalLayer> layers;
  std::vector<double> u_prev = u0;
  double residual = 0.0;

  for (int nu = 1; nu <= options.nu_cap; ++nu) {
    Grid2D g_nu = compute_g_nu_layer(u_prev, kernel);
    MaritalLayer layer;
    layer.nu = nu;
    layer.mass = age_integral(g_nu, grid.step);
    layer.u = compute_u_nu_layer(g_nu, kernel);
    layer.u_prev = std::move(u_prev);
    joint += g_nu;
    residual = *std::max_element(layer.mass.begin(), layer.mass.end());
    if (options.keep_layer_densities) layer.density = std::move(g_nu);
    u_prev = layer.u;
    layers.push_back(std::move(layer));
    if (residual < options.epsilon) break;
  }

  if (residual >= options.epsilon && residual > 100.0 * options.epsilon) {
    std::ostringstream msg;
    msg << "marital layer series not converged after " << options.nu_cap
        << " layers: last layer mass " << residual << " > 100 * epsilon (" << options.epsilon
        << ")";
    throw TruncationError(msg.str(), options.nu_cap, residual);
  }
  return MaritalSolution(grid, std::move(u0), std::move(layers), std::move(joint), residual);
}

// ---------------------------------------------------------------------------

MaritalSolution::MaritalSolution(GridSpec grid, std::vector<double> u0,
                                 std::vector<MaritalLayer> layers, Grid2D joint_density,
                                 double truncation_residual)
    : grid_(grid),
      u0_(std::move(u0)),
      layers_(std::move(layers)),
      joint_(std::move(joint_density)),
      truncation_residual_(truncation_residual) {
  g_ = age_integral(joint_, grid_.step);
}

std::span<const double> MaritalSolution::single_probability(int nu) const {
  if (nu < 0 || nu > nu_max_used()) throw ArgumentError("single_probability: nu out of range");
  if (nu == 0) return u0_;
  return layers_[static_cast<std::size_t>(nu - 1)].u;
}

double MaritalSolution::marriage_probability(double t) const {
  const double slack = 1e-9 * std::max(1.0, grid_.t_max);
  if (t < -slack || t > grid_.t_max + slack) {
    std::ostringstream msg;
    msg << "marriage_probability: t = " << t << " outside [0, " << grid_.t_max << "]";
    throw DomainError(msg.str());
  }
  return std::clamp(interpolate(g_, grid_.step, t), 0.0, 1.0);
}

double MaritalSolution::spouse_age_density(double t, double y) const {
  const double g = marriage_probability(t);
  if (y < 0.0 || y > grid_.y_max + 1e-9 * std::max(1.0, grid_.y_max))
    throw DomainError("spouse_age_density: age outside grid");
  if (g < kMarriageFloor) {
    std::ostringstream msg;
    msg << "spouse_age_density: g(" << t << ") = " << g << " below floor " << kMarriageFloor;
    throw UndefinedConditionalError(msg.str());
  }
  const std::size_t n_t = grid_.n_t();
  const std::size_t n_y = grid_.n_y();
  const double pt = std::min(t / grid_.step, static_cast<double>(n_t - 1));
  const double py = std::min(y / grid_.step, static_cast<double>(n_y - 1));
  const auto i0 = std::min(static_cast<std::size_t>(std::floor(std::max(pt, 0.0))), n_t - 1);
  const auto j0 = std::min(static_cast<std::size_t>(std::floor(py)), n_y - 1);
  const std::size_t i1 = std::min(i0 + 1, n_t - 1);
  const std::size_t j1 = std::min(j0 + 1, n_y - 1);
  const double wt = std::clamp(pt - static_cast<double>(i0), 0.0, 1.0);
  const double wy = std::clamp(py - static_cast<double>(j0), 0.0, 1.0);
  const double joint = (1 - wt) * ((1 - wy) * joint_(i0, j0) + wy * joint_(i0, j1)) +
                       wt * ((1 - wy) * joint_(i1, j0) + wy * joint_(i1, j1));
  return std::max(0.0, joint / g);
}

double MaritalSolution::conservation_error() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < g_.size(); ++i) {
    double total = u0_[i] + g_[i];
    for (const auto& layer : layers_) total += layer.u[i];
    worst = std::max(worst, std::abs(total - 1.0));
  }
  return worst;
}

}  // namespace pension
