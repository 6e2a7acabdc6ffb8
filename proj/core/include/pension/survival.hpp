#pragma once

#include "pension/grid.hpp"
#include "pension/intensity.hpp"

namespace pension {

/// exp(-int_a^b rate). Ratios l_b / l_a are always formed this way, never as
/// a quotient of two exponentials.
double survival_factor(const IntensityCurve& curve, double a, double b);

/// Probability that a spouse alive at time v, aged y + v - t, is still alive
/// at time t (aged y): exp(-int_v^t q(r, y + r - t) dr).
///
/// The integrand is replaced by its piecewise-linear interpolant on the time
/// lattice k * step. Survival along one age diagonal is therefore exactly
/// multiplicative over adjacent intervals, and at lattice nodes it coincides
/// with the marital solver's diagonal trapezoid.
double spouse_survival(const MortalitySurface& surface, double v, double t, double y,
                       double step = kDefaultStep);

}  // namespace pension
