#include <cmath>

#include "doctest.h"
#include "pension/errors.hpp"
#include "pension/survival.hpp"

using namespace pension;

TEST_CASE("survival factors") {
  const auto q = IntensityCurve::constant(0.02, 100.0);
  CHECK(survival_factor(q, 5.0, 15.0) == doctest::Approx(0.81873075307798186).epsilon(1e-14));
  CHECK(survival_factor(q, 5.0, 5.0) == 1.0);
  CHECK_THROWS_AS(survival_factor(q, 6.0, 5.0), ArgumentError);
}

TEST_CASE("spouse survival along the age diagonal") {
  // q = 0.02 exp(-0.01 t): exp(-2 (1 - e^{-0.1})).
  const MortalitySurface q(IntensityCurve::constant(0.02, 200.0),
                           IntensityCurve::gompertz_makeham(0.0, 1.0, -0.01, 125.0));
  CHECK(spouse_survival(q, 0.0, 10.0, 60.0) ==
        doctest::Approx(0.82669028037611681).epsilon(1e-7));
  CHECK(spouse_survival(q, 4.0, 4.0, 60.0) == 1.0);
  CHECK_THROWS_AS(spouse_survival(q, 5.0, 4.0, 60.0), ArgumentError);

  // Multiplicative over adjacent intervals, including off-lattice points.
  const MortalitySurface gm(IntensityCurve::gompertz_makeham(5e-4, 7e-5, 0.09, 300.0),
                            IntensityCurve::gompertz_makeham(0.0, 1.0, -0.01, 125.0));
  const double y = 80.0;  // age at t = 40
  const double whole = spouse_survival(gm, 3.33, 40.0, y);
  const double first = spouse_survival(gm, 3.33, 17.71, y - (40.0 - 17.71));
  const double second = spouse_survival(gm, 17.71, 40.0, y);
  CHECK(whole == doctest::Approx(first * second).epsilon(1e-13));

  // Time-independent constant mortality is exact.
  const MortalitySurface flat(IntensityCurve::constant(0.03, 200.0));
  CHECK(spouse_survival(flat, 2.5, 12.5, 50.0) == doctest::Approx(std::exp(-0.3)).epsilon(1e-14));
}
