#pragma once

#include <functional>
#include <optional>
#include <string>

#include "pension/grid.hpp"
#include "pension/intensity.hpp"

namespace pension {

enum class PolicyKind { LifelongAnnuity, TerminatingAnnuity, LumpSumAtAge };

std::string to_string(PolicyKind kind);

/// A spouse's pension paying only after the insured's death, while married.
///
/// Annuities pay `amount` per year while the spouse lives (terminating: only
/// while the spouse's age is at most `age_limit`). The lump sum pays
/// `amount` once when the spouse reaches `age_limit`, immediately at the
/// insured's death if the spouse is already that old.
///
/// Post-death spouse mortality: when unset, valuation falls back to the
/// marital model's spouse mortality.
struct PolicySpec {
  std::string name;
  PolicyKind kind = PolicyKind::LifelongAnnuity;
  double amount = 1.0;
  double age_limit = 0.0;  // termination / trigger age; unused for lifelong
  std::optional<MortalitySurface> post_death_mortality;

  static PolicySpec lifelong_annuity(double amount = 1.0);
  static PolicySpec terminating_annuity(double age_limit, double amount = 1.0);
  static PolicySpec lump_sum_at_age(double age_limit, double amount = 1.0);

  bool is_annuity() const { return kind != PolicyKind::LumpSumAtAge; }
  void validate() const;

  /// Copy with post_death_mortality filled in from `fallback` if unset.
  PolicySpec resolved(const MortalitySurface& fallback) const;
  const MortalitySurface& mortality() const;  // throws if unresolved
};

/// Payment rate at time t >= u for an annuity, given the insured died at u
/// with a spouse aged y: amount times the spouse's survival from u to t
/// (times the age-limit indicator for a terminating annuity).
double payment_rate_derivative(const PolicySpec& policy, double u, double y, double t,
                               double step = kDefaultStep);

struct LumpSumComponents {
  double deferred_rate = 0.0;  // money per year paid at t
  double immediate = 0.0;      // money paid at the death time u
};

/// Lump-sum decomposition for a death at u with spouse-age density f_u:
/// the deferred rate at t pays spouses reaching the trigger age exactly at
/// t, the immediate part pays spouses already past it at u.
/// `age_upper` bounds the support of f_u for the immediate integral.
LumpSumComponents lump_sum_components(const PolicySpec& policy, double u,
                                      const std::function<double(double)>& f_u, double age_upper,
                                      double t, double step = kDefaultStep);

}  // namespace pension
