#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pension {

inline constexpr double kDefaultStep = 0.1;
inline constexpr double kDefaultHorizon = 125.0;

/// Shared (t, y) lattice. Both axes start at zero and use the same step so
/// that the marriage kernel, which shifts age one-for-one with time, maps
/// nodes onto nodes.
struct GridSpec {
  double step = kDefaultStep;
  double t_max = kDefaultHorizon;
  double y_max = kDefaultHorizon;

  /// Throws ArgumentError unless step > 0 and both extents are integer
  /// multiples of step.
  void validate() const;

  std::size_t n_t() const;
  std::size_t n_y() const;
  double t(std::size_t i) const { return static_cast<double>(i) * step; }
  double y(std::size_t j) const { return static_cast<double>(j) * step; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

// Number of whole steps in `extent`, tolerant to representation error.
// Throws ArgumentError when extent is not a multiple of step.
std::size_t steps_in(double extent, double step);

// True when x is an integer multiple of step up to relative rounding.
bool is_multiple_of(double x, double step);

/// Row-major (t, y) array.
class Grid2D {
 public:
  Grid2D() = default;
  Grid2D(std::size_t n_t, std::size_t n_y, double fill = 0.0)
      : n_t_(n_t), n_y_(n_y), data_(n_t * n_y, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_y_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_y_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * n_y_, n_y_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * n_y_, n_y_};
  }

  std::size_t n_t() const { return n_t_; }
  std::size_t n_y() const { return n_y_; }
  bool empty() const { return data_.empty(); }

  Grid2D& operator+=(const Grid2D& other);

 private:
  std::size_t n_t_ = 0;
  std::size_t n_y_ = 0;
  std::vector<double> data_;
};

// Composite trapezoid over equally spaced samples.
double trapezoid(std::span<const double> values, double step);

// Running trapezoid integral; out[0] = 0.
std::vector<double> cumulative_trapezoid(std::span<const double> values, double step);

// Integral over [a, b] of the piecewise-linear interpolant of `values`
// sampled at nodes k*step (k = 0..n-1). Outside the node range the integrand
// is zero.
double integrate_interpolant(std::span<const double> values, double step, double a, double b);

// Linear interpolation of node values at x (clamped to the node range).
double interpolate(std::span<const double> values, double step, double x);

}  // namespace pension
