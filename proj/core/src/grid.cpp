#include "pension/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pension/errors.hpp"

namespace pension {

bool is_multiple_of(double x, double step) {
  const double ratio = x / step;
  return std::abs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, std::abs(ratio));
}

std::size_t steps_in(double extent, double step) {
  if (!(step > 0.0)) throw ArgumentError("grid step must be positive");
  if (extent < 0.0 || !is_multiple_of(extent, step)) {
    std::ostringstream msg;
    msg << "extent " << extent << " is not a non-negative multiple of step " << step;
    throw ArgumentError(msg.str());
  }
  return static_cast<std::size_t>(std::llround(extent / step));
}

void GridSpec::validate() const {
  if (!(step > 0.0) || !std::isfinite(step)) throw ArgumentError("grid.step must be positive");
  if (!(t_max > 0.0)) throw ArgumentError("grid.t_max must be positive");
  if (!(y_max > 0.0)) throw ArgumentError("grid.y_max must be positive");
  steps_in(t_max, step);
  steps_in(y_max, step);
}

std::size_t GridSpec::n_t() const { return steps_in(t_max, step) + 1; }
std::size_t GridSpec::n_y() const { return steps_in(y_max, step) + 1; }

Grid2D& Grid2D::operator+=(const Grid2D& other) {
  if (other.n_t_ != n_t_ || other.n_y_ != n_y_) throw ArgumentError("Grid2D shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

double trapezoid(std::span<const double> values, double step) {
  if (values.size() < 2) return 0.0;
  double sum = 0.5 * (values.front() + values.back());
  for (std::size_t k = 1; k + 1 < values.size(); ++k) sum += values[k];
  return sum * step;
}

std::vector<double> cumulative_trapezoid(std::span<const double> values, double step) {
  std::vector<double> out(values.size(), 0.0);
  for (std::size_t k = 1; k < values.size(); ++k)
    out[k] = out[k - 1] + 0.5 * step * (values[k - 1] + values[k]);
  return out;
}

double integrate_interpolant(std::span<const double> values, double step, double a, double b) {
  if (a > b) throw ArgumentError("integrate_interpolant: a > b");
  if (values.size() < 2) return 0.0;
  const double last = static_cast<double>(values.size() - 1) * step;
  a = std::max(a, 0.0);
  b = std::min(b, last);
  if (a >= b) return 0.0;

  auto value_at = [&](double x) { return interpolate(values, step, x); };
  // Whole cells strictly inside [a, b] use the trapezoid directly.
  const auto first_node = static_cast<std::size_t>(std::ceil(a / step - 1e-12));
  const auto last_node = static_cast<std::size_t>(std::floor(b / step + 1e-12));
  if (first_node > last_node) return 0.5 * (value_at(a) + value_at(b)) * (b - a);

  const double xa = static_cast<double>(first_node) * step;
  const double xb = static_cast<double>(last_node) * step;
  double sum = 0.0;
  if (xa > a) sum += 0.5 * (value_at(a) + values[first_node]) * (xa - a);
  for (std::size_t k = first_node; k < last_node; ++k)
    sum += 0.5 * step * (values[k] + values[k + 1]);
  if (b > xb) sum += 0.5 * (values[last_node] + value_at(b)) * (b - xb);
  return sum;
}

double interpolate(std::span<const double> values, double step, double x) {
  if (values.empty()) return 0.0;
  if (x <= 0.0) return values.front();
  const double pos = x / step;
  const auto k = static_cast<std::size_t>(std::floor(pos));
  if (k + 1 >= values.size()) return values.back();
  const double w = pos - static_cast<double>(k);
  return (1.0 - w) * values[k] + w * values[k + 1];
}

}  // namespace pension
