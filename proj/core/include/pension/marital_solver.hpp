#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "pension/grid.hpp"
#include "pension/intensity.hpp"

namespace pension {

inline constexpr int kDefaultNuCap = 20;
inline constexpr double kDefaultTruncationEpsilon = 1e-10;
inline constexpr double kMarriageFloor = 1e-12;

struct SolverOptions {
  int nu_cap = kDefaultNuCap;
  double epsilon = kDefaultTruncationEpsilon;
  /// Keep each g_nu(y|t) grid in the solution. Off by default: at step 0.05
  /// on a 125 x 125 grid a single layer is 50 MB.
  bool keep_layer_densities = false;
  /// 0 selects the default worker count (see worker_count()).
  unsigned threads = 0;
};

/// One term of the remarriage series.
struct MaritalLayer {
  int nu = 0;                     // marriage index, >= 1
  std::vector<double> u_prev;     // u_{nu-1}(t)
  std::vector<double> u;          // u_nu(t)
  std::vector<double> mass;       // int g_nu(y|t) dy
  std::optional<Grid2D> density;  // g_nu(y|t), when requested
};

/// Gridded marriage probability g(t) and spouse-age density f(y|t).
class MaritalSolution {
 public:
  MaritalSolution(GridSpec grid, std::vector<double> u0, std::vector<MaritalLayer> layers,
                  Grid2D joint_density, double truncation_residual);

  const GridSpec& grid() const { return grid_; }
  const std::vector<MaritalLayer>& layers() const { return layers_; }
  int nu_max_used() const { return static_cast<int>(layers_.size()); }
  double truncation_residual() const { return truncation_residual_; }

  /// u_nu(t) at grid nodes, nu = 0..nu_max_used.
  std::span<const double> single_probability(int nu) const;
  std::span<const double> marriage_probability_nodes() const { return g_; }

  /// sum_nu g_nu(y|t) = g(t) f(y|t); well defined even where g vanishes.
  const Grid2D& joint_density() const { return joint_; }

  double marriage_probability(double t) const;
  double spouse_age_density(double t, double y) const;

  /// max_t |sum_nu u_nu(t) + g(t) - 1|
  double conservation_error() const;

 private:
  GridSpec grid_;
  std::vector<double> u0_;
  std::vector<MaritalLayer> layers_;
  Grid2D joint_;
  std::vector<double> g_;
  double truncation_residual_;
};

/// Solves the coupled single/married recursion layer by layer until the
/// newest layer's mass is below options.epsilon everywhere, or nu_cap
/// layers exist. Throws TruncationError if the residual then still exceeds
/// 100 * epsilon.
MaritalSolution solve_marital(const IntensitySet& intensities, const GridSpec& grid,
                              const SolverOptions& options = {});

/// Precomputed rate tables shared by the layer kernels.
struct MaritalKernel {
  GridSpec grid;
  std::vector<double> gamma;           // gamma(t_i)
  std::vector<double> sigma;           // sigma(t_i)
  std::vector<double> gamma_decay;     // exp(-int_{t_{i-1}}^{t_i} gamma), [0] unused
  std::vector<double> gamma_survival;  // exp(-int_0^{t_i} gamma)
  Grid2D spouse_rate;                  // q(t_i, y_j)
  Grid2D age_density;                  // phi(y_j | t_i)
  Grid2D married_decay;                // survival of divorce and spouse death from
                                       // (t_{i-1}, y_{j-1}) to (t_i, y_j); column 0 unused
  unsigned threads = 1;

  static MaritalKernel build(const IntensitySet& intensities, const GridSpec& grid,
                             unsigned threads = 0);
};

/// g_nu(y|t) from u_{nu-1}.
Grid2D compute_g_nu_layer(std::span<const double> u_prev, const MaritalKernel& kernel);

/// u_nu(t) from g_nu(y|t).
std::vector<double> compute_u_nu_layer(const Grid2D& g_nu, const MaritalKernel& kernel);

/// Trapezoid weights along the age axis.
double age_weight(std::size_t j, std::size_t n_y, double step);

}  // namespace pension
