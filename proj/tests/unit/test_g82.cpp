#include <cmath>

#include "doctest.h"
#include "pension/errors.hpp"
#include "pension/g82.hpp"

using namespace pension;

namespace {

G82Inputs shifted_constant() {
  const double T = 60.0;
  return G82Inputs{IntensityCurve::piecewise_linear({0.0, 20.0, 20.0 + 1e-9}, {0.0, 0.0, 0.1}, T),
                   IntensityCurve::constant(0.0, T),
                   IntensityCurve::constant(0.0, 300.0),
                   AgeAtMarriageDensity::uniform(15.0, 35.0), 20.0};
}

}  // namespace

TEST_CASE("marriage floor") {
  // gamma jumps to 0.1 just above 20: g(30) = 1 - e^{-1}.
  const GridSpec grid{0.05, 60.0, 120.0};
  const auto sol = g82_solve(shifted_constant(), grid);
  // The trapezoid weight on the jump node drops about (step / 2) * gamma of
  // the inflow, so this is first order in the step.
  CHECK(std::abs(sol.marriage_probability(30.0) - 0.63212055882855768) <= 0.6 * 0.05 * 0.1);
  const auto u0 = sol.single_probability(0);
  for (std::size_t i = 0; i < grid.n_t(); ++i) {
    const double x = grid.t(i);
    if (x <= 20.0) {
      CHECK(u0[i] == 1.0);
      CHECK(sol.marriage_probability_nodes()[i] == 0.0);
    }
  }
  CHECK(u0[grid.n_t() - 1] == doctest::Approx(std::exp(-0.1 * 40.0)).epsilon(1e-7));
}

TEST_CASE("intensities must vanish below the floor") {
  G82Inputs in = shifted_constant();
  in.sigma_a = IntensityCurve::constant(0.01, 60.0);
  CHECK_THROWS_AS(g82_solve(in, GridSpec{0.1, 60.0, 120.0}), ArgumentError);
}

TEST_CASE("agrees with the general solver") {
  const double T = 80.0;
  G82Inputs in{IntensityCurve::piecewise_linear({0.0, 18.0, 30.0, 60.0}, {0.0, 0.0, 0.15, 0.03}, T),
               IntensityCurve::piecewise_linear({0.0, 18.0, 40.0}, {0.0, 0.0, 0.03}, T),
               IntensityCurve::gompertz_makeham(5e-4, 7e-5, 0.09, 300.0, 0.1),
               AgeAtMarriageDensity::truncated_normal(-2.0, 4.0), 18.0};
  const GridSpec grid{0.1, T, 150.0};
  const auto a = g82_solve(in, grid);
  const auto b = solve_marital(
      g82_as_general(in, DeathDensity::from_mortality(IntensityCurve::constant(0.02, T))), grid);
  const auto ga = a.marriage_probability_nodes();
  const auto gb = b.marriage_probability_nodes();
  double worst = 0.0;
  for (std::size_t i = 0; i < ga.size(); ++i) worst = std::max(worst, std::abs(ga[i] - gb[i]));
  CHECK(worst < 1e-10);
  CHECK(a.nu_max_used() == b.nu_max_used());
}
