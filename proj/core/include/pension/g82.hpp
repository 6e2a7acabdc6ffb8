#pragma once

#include "pension/grid.hpp"
#include "pension/intensity.hpp"
#include "pension/marital_solver.hpp"

namespace pension {

/// Age-parameterised inputs: the insured is aged x, marriage and divorce
/// intensities vanish up to a_min and spouse mortality depends on age only.
struct G82Inputs {
  IntensityCurve gamma_a;
  IntensityCurve sigma_a;
  IntensityCurve spouse_mortality;  // q(eta), age only
  AgeAtMarriageDensity age_at_marriage;  // phi(eta | x)
  double a_min = 0.0;

  /// Throws ArgumentError unless gamma_a and sigma_a vanish on [0, a_min]
  /// at every lattice node of `grid`.
  void validate(const GridSpec& grid) const;
};

/// Age-indexed solution on `grid` (time axis read as the insured's age).
///
/// Uses survival functions l(x) = exp(-int_0^x rate) and commutation-style
/// prefix sums instead of the per-step recurrence of solve_marital, so the
/// two agree only if both discretisations are right.
MaritalSolution g82_solve(const G82Inputs& inputs, const GridSpec& grid,
                          const SolverOptions& options = {});

/// The same model as a general IntensitySet with time-independent spouse
/// mortality. `death` is carried through unchanged.
IntensitySet g82_as_general(const G82Inputs& inputs, DeathDensity death);

}  // namespace pension
