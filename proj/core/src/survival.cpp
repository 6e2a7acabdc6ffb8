#include "pension/survival.hpp"

#include <algorithm>
#include <cmath>

#include "pension/errors.hpp"

namespace pension {

double survival_factor(const IntensityCurve& curve, double a, double b) {
  if (a > b) throw ArgumentError("survival_factor: a > b");
  return std::exp(-curve.integrated_hazard(a, b));
}

double spouse_survival(const MortalitySurface& surface, double v, double t, double y,
                       double step) {
  if (v > t) throw ArgumentError("spouse_survival: v > t");
  if (v < 0.0) throw DomainError("spouse_survival: negative start time");
  const double offset = y - t;  // age minus time along the diagonal
  const double age_at_v = offset + v;
  if (age_at_v < -1e-9 * std::max(1.0, std::abs(y)))
    throw DomainError("spouse_survival: spouse age at v would be negative");
  if (v == t || surface.is_identically_zero()) return 1.0;

  auto rate_on_diagonal = [&](double r) {
    return surface.rate(r, std::max(0.0, offset + r));
  };
  // Lattice nodes k*step inside (v, t); the interpolant is linear between
  // consecutive breakpoints {v, nodes..., t}.
  const double pos_v = v / step;
  const double pos_t = t / step;
  auto k = static_cast<long long>(std::floor(pos_v)) + 1;
  const auto k_end = static_cast<long long>(std::ceil(pos_t)) - 1;

  // Values of the interpolant at v and t come from the bracketing nodes.
  auto node_rate = [&](long long idx) {
    const double r = static_cast<double>(idx) * step;
    // Nodes before the spouse's birth are not used: clamp to the birth time.
    return rate_on_diagonal(std::max(r, -offset));
  };
  auto interpolant = [&](double x) {
    const double pos = x / step;
    const auto lo = static_cast<long long>(std::floor(pos));
    const double w = pos - static_cast<double>(lo);
    if (w <= 1e-12) return node_rate(lo);
    if (w >= 1.0 - 1e-12) return node_rate(lo + 1);
    return (1.0 - w) * node_rate(lo) + w * node_rate(lo + 1);
  };

  double hazard = 0.0;
  double prev_x = v;
  double prev_rate = interpolant(v);
  for (; k <= k_end; ++k) {
    const double x = static_cast<double>(k) * step;
    if (x <= prev_x) continue;
    const double r = node_rate(k);
    hazard += 0.5 * (prev_rate + r) * (x - prev_x);
    prev_x = x;
    prev_rate = r;
  }
  if (t > prev_x) hazard += 0.5 * (prev_rate + interpolant(t)) * (t - prev_x);
  return std::exp(-hazard);
}

}  // namespace pension
