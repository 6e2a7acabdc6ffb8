#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "pension/grid.hpp"
#include "pension/intensity.hpp"
#include "pension/marital_solver.hpp"
#include "pension/payments.hpp"

namespace pension {

/// Deterministic short rate; discount(t) = exp(-int_0^t r).
class ShortRate {
 public:
  explicit ShortRate(IntensityCurve curve) : curve_(std::move(curve)) {}
  static ShortRate constant(double r, double t_max = kDefaultHorizon) {
    return ShortRate(IntensityCurve::constant(r, t_max));
  }

  double discount(double t) const { return std::exp(-curve_.integrated_hazard(0.0, t)); }
  const IntensityCurve& curve() const { return curve_; }

 private:
  IntensityCurve curve_;
};

/// Expected payment rate a(t), its running integral A(t), and the part of
/// a(t) that comes from lump sums paid at the moment of death.
struct CashflowCurve {
  GridSpec grid;
  std::vector<double> rate;        // a(t_i), money per year
  std::vector<double> cumulative;  // A(t_i)
  std::vector<double> immediate;   // death-time lump-sum component of rate

  /// Builds A from a by trapezoid accumulation.
  static CashflowCurve from_rate(GridSpec grid, std::vector<double> rate,
                                 std::vector<double> immediate = {});
};

CashflowCurve cashflow(const MaritalSolution& solution, const PolicySpec& policy,
                       const DeathDensity& death, const GridSpec& grid, unsigned threads = 0);

double expected_cumulative(const CashflowCurve& cf, double t);

double liability(const CashflowCurve& cf, const ShortRate& rate);

struct ValuationReport {
  std::string policy_name;
  double liability = 0.0;
  CashflowCurve cashflow;
  std::vector<double> discount;
  /// P(T > t_max): deaths beyond the horizon contribute nothing.
  double death_mass_beyond_horizon = 0.0;
  std::string parameters;
};

/// Cashflow plus liability for one policy. The policy's post-death
/// mortality falls back to `intensities.spouse_mortality`.
ValuationReport value_policy(const MaritalSolution& solution, const IntensitySet& intensities,
                             const PolicySpec& policy, const ShortRate& rate,
                             unsigned threads = 0);

/// Age-indexed assumptions shared by every portfolio member. Member i, aged
/// x0 at valuation, sees gamma(t) = gamma_by_age(x0 + t), etc.
struct AgeBasedAssumptions {
  IntensityCurve gamma_by_age;
  IntensityCurve sigma_by_age;
  MortalitySurface spouse_mortality;  // calendar time x spouse age
  AgeAtMarriageDensity age_at_marriage_by_age;
  IntensityCurve insured_mortality_by_age;
};

struct PortfolioMember {
  double initial_age = 0.0;
  PolicySpec policy;
  double weight = 1.0;
};

struct PortfolioOptions {
  double step = kDefaultStep;
  double max_age = kDefaultHorizon;
  double y_max = kDefaultHorizon;
  SolverOptions solver;
  unsigned threads = 0;
};

struct MemberValuation {
  double initial_age = 0.0;
  double weight = 1.0;
  ValuationReport report;
};

struct PortfolioValuation {
  double total = 0.0;
  std::vector<MemberValuation> members;
  std::size_t distinct_solutions = 0;
};

/// Intensities for an insured aged `initial_age` at t = 0.
IntensitySet member_intensities(const AgeBasedAssumptions& assumptions, double initial_age,
                                double step);

PortfolioValuation portfolio_value(const std::vector<PortfolioMember>& members,
                                   const AgeBasedAssumptions& assumptions, const ShortRate& rate,
                                   const PortfolioOptions& options = {});

}  // namespace pension
