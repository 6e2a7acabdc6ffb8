#include <cmath>

#include "doctest.h"
#include "pension/errors.hpp"
#include "pension/payments.hpp"

using namespace pension;

namespace {

MortalitySurface flat(double q) { return MortalitySurface(IntensityCurve::constant(q, 300.0)); }

}  // namespace

TEST_CASE("annuity payment rates") {
  PolicySpec life = PolicySpec::lifelong_annuity(2.0);
  life.post_death_mortality = flat(0.02);
  CHECK(payment_rate_derivative(life, 5.0, 60.0, 15.0) ==
        doctest::Approx(2.0 * 0.81873075307798186).epsilon(1e-14));
  CHECK(payment_rate_derivative(life, 5.0, 60.0, 5.0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(payment_rate_derivative(life, 5.0, 60.0, 4.0), ArgumentError);

  PolicySpec term = PolicySpec::terminating_annuity(67.0);
  term.post_death_mortality = flat(0.02);
  CHECK(payment_rate_derivative(term, 0.0, 60.0, 5.0) == doctest::Approx(std::exp(-0.1)));
  CHECK(payment_rate_derivative(term, 0.0, 60.0, 7.5) == 0.0);  // spouse past 67

  PolicySpec unresolved = PolicySpec::lifelong_annuity();
  CHECK_THROWS_AS(payment_rate_derivative(unresolved, 0.0, 60.0, 1.0), ArgumentError);
}

TEST_CASE("lump sum decomposition") {
  PolicySpec lump = PolicySpec::lump_sum_at_age(65.0);
  lump.post_death_mortality = flat(0.02);
  // Spouse ages at death uniform on [55, 60]; the spouse aged 58 reaches 65
  // seven years later.
  auto f = [](double y) { return (y >= 55.0 && y <= 60.0) ? 0.2 : 0.0; };
  auto parts = lump_sum_components(lump, 0.0, f, 100.0, 7.0);
  CHECK(parts.deferred_rate == doctest::Approx(0.17387164707976116).epsilon(1e-12));
  CHECK(parts.immediate == doctest::Approx(0.0).epsilon(1e-12));

  // Spouses aged [63, 68]: 3/5 of them are already past the trigger age.
  auto g = [](double y) { return (y >= 63.0 && y <= 68.0) ? 0.2 : 0.0; };
  parts = lump_sum_components(lump, 0.0, g, 100.0, 1.0);
  CHECK(parts.immediate == doctest::Approx(0.6).epsilon(2e-2));  // interpolant smears the jump at 68
  CHECK(parts.deferred_rate == doctest::Approx(0.2 * std::exp(-0.02)).epsilon(1e-12));

  CHECK_THROWS_AS(payment_rate_derivative(lump, 0.0, 60.0, 1.0), UnsupportedOperation);
}

TEST_CASE("policy validation") {
  CHECK_THROWS_AS(PolicySpec::lifelong_annuity(0.0).validate(), ArgumentError);
  CHECK_THROWS_AS(PolicySpec::terminating_annuity(-1.0).validate(), ArgumentError);
  CHECK(to_string(PolicyKind::LumpSumAtAge) == "lump_sum_at_age");
  CHECK(PolicySpec::terminating_annuity(67.0).is_annuity());
  CHECK_FALSE(PolicySpec::lump_sum_at_age(65.0).is_annuity());
}
