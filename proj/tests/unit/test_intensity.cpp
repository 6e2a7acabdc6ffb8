#include <cmath>

#include "doctest.h"
#include "pension/errors.hpp"
#include "pension/grid.hpp"
#include "pension/intensity.hpp"

using namespace pension;

TEST_CASE("Gompertz-Makeham rate") {
  const auto gm = IntensityCurve::gompertz_makeham(0.0005, 0.00007, 0.09);
  CHECK(gm.rate(60.0) == doctest::Approx(0.015998449134293096).epsilon(1e-14));
  CHECK_THROWS_AS(gm.rate(-1.0), DomainError);
  CHECK_THROWS_AS(gm.rate(126.0), DomainError);
}

TEST_CASE("integrated hazards") {
  const auto c = IntensityCurve::constant(0.02, 50.0);
  CHECK(c.integrated_hazard(3.0, 13.0) == doctest::Approx(0.2));
  CHECK_THROWS_AS(c.integrated_hazard(5.0, 4.0), ArgumentError);

  const auto pl = IntensityCurve::piecewise_linear({10.0, 20.0}, {0.0, 1.0}, 40.0);
  CHECK(pl.rate(5.0) == 0.0);
  CHECK(pl.rate(15.0) == doctest::Approx(0.5));
  CHECK(pl.rate(30.0) == doctest::Approx(1.0));  // flat beyond the last knot
  CHECK(pl.integrated_hazard(0.0, 30.0) == doctest::Approx(5.0 + 10.0));

  // Lattice hazard of the Gompertz curve is additive to rounding.
  const auto gm = IntensityCurve::gompertz_makeham(0.0005, 0.00007, 0.09, 125.0, 0.1);
  const double whole = gm.integrated_hazard(3.37, 97.21);
  const double parts = gm.integrated_hazard(3.37, 41.05) + gm.integrated_hazard(41.05, 97.21);
  CHECK(std::abs(whole - parts) < 1e-13);
  // and close to the exact integral
  const double exact = 0.0005 * 93.84 + 0.00007 / 0.09 * (std::exp(0.09 * 97.21) - std::exp(0.09 * 3.37));
  CHECK(whole == doctest::Approx(exact).epsilon(1e-5));
}

TEST_CASE("shifted curves follow the age") {
  const auto gm = IntensityCurve::gompertz_makeham(0.0005, 0.00007, 0.09);
  const auto s = gm.shifted(40.0);
  CHECK(s.t_max() == doctest::Approx(85.0));
  CHECK(s.rate(20.0) == doctest::Approx(gm.rate(60.0)).epsilon(1e-13));
  const auto pl = IntensityCurve::piecewise_linear({0.0, 50.0}, {0.0, 1.0}, 100.0).shifted(25.0);
  CHECK(pl.rate(0.0) == doctest::Approx(0.5));
}

TEST_CASE("mortality surface with improvement") {
  const MortalitySurface q(IntensityCurve::constant(0.02, 200.0),
                           IntensityCurve::gompertz_makeham(0.0, 1.0, -0.01, 125.0));
  CHECK(q.rate(10.0, 70.0) == doctest::Approx(0.018096748360719191).epsilon(1e-14));
  CHECK_FALSE(q.time_independent());
  CHECK_THROWS_AS(q.rate(-1.0, 50.0), DomainError);
  CHECK_THROWS_AS(q.rate(1.0, -50.0), DomainError);
}

TEST_CASE("age-at-marriage densities integrate to one") {
  const auto u = AgeAtMarriageDensity::uniform(20.0, 40.0);
  CHECK(u.density(30.0, 5.0) == doctest::Approx(0.05));
  CHECK(u.density(19.0, 5.0) == 0.0);
  CHECK(u.density(20.0, 5.0) == doctest::Approx(0.025));  // midpoint at the jump
  CHECK(validate_age_density(u, 0.0, 1e-12, 0.1));

  const auto drift = AgeAtMarriageDensity::uniform(20.0, 30.0, 1.0, 1.0);
  CHECK(drift.density(45.0, 20.0) == doctest::Approx(0.1));
  CHECK(drift.density(35.0, 20.0) == 0.0);

  // Truncated normal, mean t - 3, sd 5, at t = 30: trapezoid error at 0.1
  // is of order 1e-11.
  const auto n = AgeAtMarriageDensity::truncated_normal(-3.0, 5.0);
  CHECK(validate_age_density(n, 30.0, 1e-9, 0.1));
  // Heavily truncated: t = 0, mean -3 -> only the upper tail remains.
  CHECK(validate_age_density(n, 0.0, 1e-4, 0.01));
  CHECK(n.density(-1.0, 10.0) == 0.0);

  TabulatedAges tab;
  tab.times = {0.0, 10.0};
  tab.ages = {20.0, 30.0, 40.0};
  tab.values = {{0.0, 0.1, 0.0}, {0.1, 0.0, 0.1}};
  const auto t = AgeAtMarriageDensity::tabulated(tab);
  CHECK(t.density(25.0, 0.0) == doctest::Approx(0.05));
  CHECK(t.density(30.0, 5.0) == doctest::Approx(0.05));
  CHECK(t.density(30.0, 50.0) == doctest::Approx(0.0));  // clamped in time
  CHECK(t.density(45.0, 5.0) == 0.0);
  CHECK(validate_age_density(t, 3.0, 1e-12, 0.1));

  CHECK_THROWS_AS(AgeAtMarriageDensity::uniform(40.0, 20.0), ArgumentError);
  CHECK_THROWS_AS(AgeAtMarriageDensity::truncated_normal(0.0, 0.0), ArgumentError);
}

TEST_CASE("death densities") {
  const auto d = DeathDensity::from_mortality(IntensityCurve::constant(0.04, 125.0), 0.1);
  CHECK(d.density(10.0) == doctest::Approx(0.04 * std::exp(-0.4)));
  CHECK(d.density(130.0) == 0.0);
  CHECK_THROWS_AS(d.density(-0.5), DomainError);
  CHECK(d.cumulative(125.0) == doctest::Approx(1.0 - std::exp(-5.0)).epsilon(1e-5));

  const auto tab = DeathDensity::tabulated({0.0, 10.0}, {0.1, 0.1}, 0.1);
  CHECK(tab.total_mass() == doctest::Approx(1.0));
  CHECK_THROWS_AS(DeathDensity::tabulated({0.0, 10.0}, {0.2, 0.2}, 0.1), ArgumentError);
}

TEST_CASE("intensity set validation") {
  IntensitySet s{IntensityCurve::constant(0.1, 50.0), IntensityCurve::constant(0.0, 50.0),
                 MortalitySurface(IntensityCurve::constant(0.01, 200.0)),
                 AgeAtMarriageDensity::uniform(20.0, 40.0),
                 DeathDensity::from_mortality(IntensityCurve::constant(0.02, 50.0))};
  CHECK_NOTHROW(validate(s, GridSpec{0.1, 50.0, 100.0}));
  // gamma does not cover the horizon
  CHECK_THROWS_AS(validate(s, GridSpec{0.1, 60.0, 100.0}), ArgumentError);
  // most of the age density is above y_max
  CHECK_THROWS_AS(validate(s, GridSpec{0.1, 50.0, 30.0}), ArgumentError);
}
