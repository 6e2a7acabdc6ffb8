#include "pension/g82.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pension/errors.hpp"
#include "pension/parallel.hpp"

namespace pension {

void G82Inputs::validate(const GridSpec& grid) const {
  grid.validate();
  if (a_min < 0.0) throw ArgumentError("a_min must be non-negative");
  for (std::size_t i = 0; i < grid.n_t() && grid.t(i) <= a_min + 1e-12; ++i) {
    if (gamma_a.rate(grid.t(i)) != 0.0 || sigma_a.rate(grid.t(i)) != 0.0) {
      std::ostringstream msg;
      msg << "marriage and divorce intensities must vanish below a_min = " << a_min
          << " (nonzero at age " << grid.t(i) << ")";
      throw ArgumentError(msg.str());
    }
  }
  if (spouse_mortality.t_max() + 1e-9 < grid.y_max)
    throw ArgumentError("spouse mortality does not cover the age grid");
}

IntensitySet g82_as_general(const G82Inputs& inputs, DeathDensity death) {
  return IntensitySet{inputs.gamma_a, inputs.sigma_a, MortalitySurface(inputs.spouse_mortality),
                      inputs.age_at_marriage, std::move(death)};
}

namespace {

constexpr double kExponentLimit = 700.0;

struct AgeTables {
  std::size_t n_x = 0;
  std::size_t n_eta = 0;
  double step = 0.0;
  std::vector<double> gamma;     // gamma_a(x_i)
  std::vector<double> sigma;     // sigma_a(x_i)
  std::vector<double> log_lg;    // int_0^x gamma_a
  std::vector<double> log_ls;    // int_0^x sigma_a
  std::vector<double> q;         // q(eta_j)
  std::vector<double> log_lz;    // int_0^eta q, trapezoid on the age lattice
  Grid2D phi;                    // phi(eta_j | x_i)
};

AgeTables tabulate(const G82Inputs& in, const GridSpec& grid, unsigned threads) {
  AgeTables tb;
  tb.n_x = grid.n_t();
  tb.n_eta = grid.n_y();
  tb.step = grid.step;
  tb.gamma.resize(tb.n_x);
  tb.sigma.resize(tb.n_x);
  tb.log_lg.resize(tb.n_x);
  tb.log_ls.resize(tb.n_x);
  for (std::size_t i = 0; i < tb.n_x; ++i) {
    const double x = grid.t(i);
    tb.gamma[i] = in.gamma_a.rate(x);
    tb.sigma[i] = in.sigma_a.rate(x);
    tb.log_lg[i] = in.gamma_a.integrated_hazard(0.0, x);
    tb.log_ls[i] = in.sigma_a.integrated_hazard(0.0, x);
  }
  tb.q.resize(tb.n_eta);
  for (std::size_t j = 0; j < tb.n_eta; ++j) tb.q[j] = in.spouse_mortality.rate(grid.y(j));
  tb.log_lz = cumulative_trapezoid(tb.q, tb.step);
  tb.phi = Grid2D(tb.n_x, tb.n_eta);
  parallel_for(tb.n_x, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      for (std::size_t j = 0; j < tb.n_eta; ++j)
        tb.phi(i, j) = in.age_at_marriage.density(grid.y(j), grid.t(i));
  });
  return tb;
}

// g_nu(eta_j | x_i) = sum_k w_k c_k  l^s(x_k) l^z(eta_j - x_i + x_k) / (l^s(x_i) l^z(eta_j))
// with c_k = u_{nu-1}(x_k) gamma(x_k) phi(eta_j - x_i + x_k | x_k). The sum
// starts where the diagonal enters the grid (x = 0 or spouse age 0), so the
// trapezoid weights halve there and at k = i.
Grid2D g_layer(const std::vector<double>& u_prev, const AgeTables& tb, unsigned threads) {
  Grid2D out(tb.n_x, tb.n_eta);
  const double h = 0.5 * tb.step;
  const std::size_t n_diag = tb.n_x + tb.n_eta - 1;
  parallel_for(n_diag, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t d = begin; d < end; ++d) {
      const std::size_t i0 = d < tb.n_eta ? 0 : d - tb.n_eta + 1;
      const std::size_t j0 = d < tb.n_eta ? tb.n_eta - 1 - d : 0;
      const double base = tb.log_ls[i0] + tb.log_lz[j0];
      double prefix = 0.0;  // sum over k < i of w_k c_k exp(D_k - base)
      for (std::size_t i = i0, j = j0; i < tb.n_x && j < tb.n_eta; ++i, ++j) {
        const double rel = tb.log_ls[i] + tb.log_lz[j] - base;
        if (rel > kExponentLimit) {
          std::ostringstream msg;
          msg << "cumulative hazard along a diagonal exceeds " << kExponentLimit
              << " at age " << static_cast<double>(i) * tb.step;
          throw DomainError(msg.str());
        }
        const double scale = std::exp(rel);
        const double c = u_prev[i] * tb.gamma[i] * tb.phi(i, j) * scale;
        if (i == i0) {
          out(i, j) = 0.0;
          prefix += h * c;
        } else {
          out(i, j) = (prefix + h * c) / scale;
          prefix += tb.step * c;
        }
      }
    }
  });
  return out;
}

// u_nu(x_i) = l^g(x_i) sum_k w_k J_k / l^g(x_k), J the exit flow by divorce
// or spouse death.
std::vector<double> u_layer(const Grid2D& g, const AgeTables& tb) {
  const double h = 0.5 * tb.step;
  std::vector<double> u(tb.n_x, 0.0);
  double prefix = 0.0;
  for (std::size_t k = 0; k < tb.n_x; ++k) {
    double flow = 0.0;
    for (std::size_t j = 0; j < tb.n_eta; ++j)
      flow += age_weight(j, tb.n_eta, tb.step) * g(k, j) * (tb.sigma[k] + tb.q[j]);
    const double scaled = flow * std::exp(tb.log_lg[k]);
    if (k > 0) u[k] = std::exp(-tb.log_lg[k]) * (prefix + h * scaled);
    prefix += (k == 0 ? h : tb.step) * scaled;
  }
  return u;
}

std::vector<double> mass(const Grid2D& g, const AgeTables& tb) {
  std::vector<double> out(tb.n_x, 0.0);
  for (std::size_t i = 0; i < tb.n_x; ++i)
    for (std::size_t j = 0; j < tb.n_eta; ++j)
      out[i] += age_weight(j, tb.n_eta, tb.step) * g(i, j);
  return out;
}

}  // namespace

MaritalSolution g82_solve(const G82Inputs& inputs, const GridSpec& grid,
                          const SolverOptions& options) {
  inputs.validate(grid);
  if (options.nu_cap < 1) throw ArgumentError("nu_cap must be at least 1");
  if (!(options.epsilon > 0.0)) throw ArgumentError("truncation epsilon must be positive");
  const unsigned threads = options.threads == 0 ? worker_count() : options.threads;
  const AgeTables tb = tabulate(inputs, grid, threads);

  // u_0(x) = 1 up to a_min, then l^g(x) / l^g(a_min); gamma vanishes below
  // a_min so both pieces are exp(-int_0^x gamma).
  std::vector<double> u0(tb.n_x);
  for (std::size_t i = 0; i < tb.n_x; ++i)
    u0[i] = grid.t(i) <= inputs.a_min ? 1.0 : std::exp(-tb.log_lg[i]);

  Grid2D joint(tb.n_x, tb.n_eta);
  std::vector<MaritalLayer> layers;
  std::vector<double> u_prev = u0;
  double residual = 0.0;
  for (int nu = 1; nu <= options.nu_cap; ++nu) {
    Grid2D g = g_layer(u_prev, tb, threads);
    MaritalLayer layer;
    layer.nu = nu;
    layer.mass = mass(g, tb);
    layer.u = u_layer(g, tb);
    layer.u_prev = std::move(u_prev);
    joint += g;
    residual = *std::max_element(layer.mass.begin(), layer.mass.end());
    if (options.keep_layer_densities) layer.density = std::move(g);
    u_prev = layer.u;
    layers.push_back(std::move(layer));
    if (residual < options.epsilon) break;
  }
  if (residual >= options.epsilon && residual > 100.0 * options.epsilon) {
    std::ostringstream msg;
    msg << "age-parameterised layer series not converged after " << options.nu_cap
        << " layers: last layer mass " << residual;
    throw TruncationError(msg.str(), options.nu_cap, residual);
  }
  return MaritalSolution(grid, std::move(u0), std::move(layers), std::move(joint), residual);
}

}  // namespace pension
