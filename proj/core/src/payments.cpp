#include "pension/payments.hpp"

#include <cmath>
#include <vector>

#include "pension/errors.hpp"
#include "pension/survival.hpp"

namespace pension {

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::LifelongAnnuity: return "lifelong_annuity";
    case PolicyKind::TerminatingAnnuity: return "terminating_annuity";
    case PolicyKind::LumpSumAtAge: return "lump_sum_at_age";
  }
  return "unknown";
}

PolicySpec PolicySpec::lifelong_annuity(double amount) {
  PolicySpec p;
  p.name = "lifelong_annuity";
  p.kind = PolicyKind::LifelongAnnuity;
  p.amount = amount;
  p.validate();
  return p;
}

PolicySpec PolicySpec::terminating_annuity(double age_limit, double amount) {
  PolicySpec p;
  p.name = "terminating_annuity";
  p.kind = PolicyKind::TerminatingAnnuity;
  p.amount = amount;
  p.age_limit = age_limit;
  p.validate();
  return p;
}

PolicySpec PolicySpec::lump_sum_at_age(double age_limit, double amount) {
  PolicySpec p;
  p.name = "lump_sum_at_age";
  p.kind = PolicyKind::LumpSumAtAge;
  p.amount = amount;
  p.age_limit = age_limit;
  p.validate();
  return p;
}

void PolicySpec::validate() const {
  if (!(amount > 0.0) || !std::isfinite(amount)) throw ArgumentError("policy amount must be > 0");
  if (kind != PolicyKind::LifelongAnnuity && !(age_limit >= 0.0))
    throw ArgumentError("policy age limit must be >= 0");
}

PolicySpec PolicySpec::resolved(const MortalitySurface& fallback) const {
  PolicySpec out = *this;
  if (!out.post_death_mortality) out.post_death_mortality = fallback;
  return out;
}

const MortalitySurface& PolicySpec::mortality() const {
  if (!post_death_mortality)
    throw ArgumentError("policy '" + name + "' has no post-death spouse mortality");
  return *post_death_mortality;
}

double payment_rate_derivative(const PolicySpec& policy, double u, double y, double t,
                               double step) {
  if (!policy.is_annuity())
    throw UnsupportedOperation("payment_rate_derivative: lump sums have no survival-only rate");
  if (t < u) throw ArgumentError("payment_rate_derivative: no payments before the death time");
  if (u < 0.0 || y < 0.0) throw DomainError("payment_rate_derivative: negative time or age");
  const double age_at_t = y + t - u;
  if (policy.kind == PolicyKind::TerminatingAnnuity &&
      age_at_t > policy.age_limit + 1e-9 * std::max(1.0, policy.age_limit))
    return 0.0;
  return policy.amount * spouse_survival(policy.mortality(), u, t, age_at_t, step);
}

LumpSumComponents lump_sum_components(const PolicySpec& policy, double u,
                                      const std::function<double(double)>& f_u, double age_upper,
                                      double t, double step) {
  if (policy.kind != PolicyKind::LumpSumAtAge)
    throw UnsupportedOperation("lump_sum_components: policy is not a lump sum");
  if (t < u) throw ArgumentError("lump_sum_components: t < u");
  const double c = policy.age_limit;
  LumpSumComponents out;

  // Spouse aged c + u - t at death reaches c exactly at t.
  const double age_at_death = c + u - t;
  if (age_at_death >= 0.0) {
    out.deferred_rate = policy.amount * f_u(age_at_death) *
                        spouse_survival(policy.mortality(), u, t, c, step);
  }

  if (age_upper > c) {
    const auto n = static_cast<std::size_t>(std::ceil(age_upper / step)) + 1;
    std::vector<double> samples(n + 1);
    for (std::size_t j = 0; j <= n; ++j) samples[j] = f_u(static_cast<double>(j) * step);
    out.immediate = policy.amount * integrate_interpolant(samples, step, c, age_upper);
  }
  return out;
}

}  // namespace pension
