#include "pension/valuation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "pension/errors.hpp"
#include "pension/parallel.hpp"

namespace pension {

CashflowCurve CashflowCurve::from_rate(GridSpec grid, std::vector<double> rate,
                                       std::vector<double> immediate) {
  if (rate.size() != grid.n_t()) throw ArgumentError("cashflow rate does not match grid");
  if (immediate.empty()) immediate.assign(rate.size(), 0.0);
  CashflowCurve cf;
  cf.grid = grid;
  cf.cumulative = cumulative_trapezoid(rate, grid.step);
  cf.rate = std::move(rate);
  cf.immediate = std::move(immediate);
  return cf;
}

namespace {

constexpr std::size_t kDiagonalBlock = 64;

struct CashflowInputs {
  const GridSpec& grid;
  const Grid2D& joint;                 // g(u) f(y|u)
  const std::vector<double>& death;    // h(u_k)
  const MortalitySurface& mortality;   // post-death spouse mortality
};

// Annuity payment rate: for every node (u_k, y_j) the mass h g f w_j
// travels along its age diagonal, decaying with the spouse's survival; the
// trapezoid over u becomes a recurrence per diagonal (see the marital
// solver). Diagonals are processed in fixed blocks whose partial sums are
// added in block order, so the result does not depend on the thread count.
std::vector<double> annuity_rate(const CashflowInputs& in, const PolicySpec& policy,
                                 unsigned threads) {
  const std::size_t n_t = in.grid.n_t();
  const std::size_t n_y = in.grid.n_y();
  const double step = in.grid.step;
  const double half = 0.5 * step;
  const bool terminating = policy.kind == PolicyKind::TerminatingAnnuity;
  const double limit = policy.age_limit + 1e-9 * std::max(1.0, policy.age_limit);

  const std::size_t n_diag = n_t + n_y - 1;
  const std::size_t n_blocks = (n_diag + kDiagonalBlock - 1) / kDiagonalBlock;
  std::vector<std::vector<double>> partial(n_blocks, std::vector<double>(n_t, 0.0));

  parallel_for(n_blocks, threads, [&](std::size_t b_begin, std::size_t b_end) {
    for (std::size_t b = b_begin; b < b_end; ++b) {
      auto& out = partial[b];
      const std::size_t dd_end = std::min(n_diag, (b + 1) * kDiagonalBlock);
      for (std::size_t dd = b * kDiagonalBlock; dd < dd_end; ++dd) {
        // offset = j - i; the spouse's age at t_i is (offset + i) * step.
        const long long offset = static_cast<long long>(dd) - static_cast<long long>(n_t - 1);
        const std::size_t i_start = offset < 0 ? static_cast<std::size_t>(-offset) : 0;
        auto source = [&](std::size_t i) {
          const auto j = static_cast<std::size_t>(offset + static_cast<long long>(i));
          return j < n_y ? age_weight(j, n_y, step) * in.death[i] * in.joint(i, j) : 0.0;
        };
        auto age_at = [&](std::size_t i) {
          return static_cast<double>(offset + static_cast<long long>(i)) * step;
        };
        if (terminating && age_at(i_start) > limit) continue;
        double c_prev = source(i_start);
        double acc = i_start == 0 ? 0.0 : half * c_prev;
        double q_prev = in.mortality.rate(in.grid.t(i_start), age_at(i_start));
        out[i_start] += acc;
        for (std::size_t i = i_start + 1; i < n_t; ++i) {
          const double age = age_at(i);
          if (terminating && age > limit) break;
          const double q = in.mortality.rate(in.grid.t(i), age);
          const double c = source(i);
          acc = std::exp(-half * (q_prev + q)) * (acc + half * c_prev) + half * c;
          out[i] += acc;
          c_prev = c;
          q_prev = q;
        }
      }
    }
  });

  std::vector<double> rate(n_t, 0.0);
  for (const auto& block : partial)
    for (std::size_t i = 0; i < n_t; ++i) rate[i] += block[i];
  for (double& r : rate) r *= policy.amount;
  return rate;
}

// Density (per year of age and per year of u) of spouses whose age is
// exactly (offset + i) * step at t_i, integrated over the death time u <= t_i
// with the survival from u to t_i applied. No age weights: this is the
// Leibniz boundary term, a density in age evaluated at a point.
double diagonal_point_mass(const CashflowInputs& in, long long offset, std::size_t i_target) {
  const std::size_t n_y = in.grid.n_y();
  const double step = in.grid.step;
  const double half = 0.5 * step;
  if (offset + static_cast<long long>(i_target) < 0) return 0.0;
  const std::size_t i_start = offset < 0 ? static_cast<std::size_t>(-offset) : 0;
  auto source = [&](std::size_t i) {
    const auto j = static_cast<std::size_t>(offset + static_cast<long long>(i));
    return j < n_y ? in.death[i] * in.joint(i, j) : 0.0;
  };
  auto age_at = [&](std::size_t i) {
    return static_cast<double>(offset + static_cast<long long>(i)) * step;
  };
  double c_prev = source(i_start);
  double acc = i_start == 0 ? 0.0 : half * c_prev;
  double q_prev = in.mortality.rate(in.grid.t(i_start), age_at(i_start));
  for (std::size_t i = i_start + 1; i <= i_target; ++i) {
    const double q = in.mortality.rate(in.grid.t(i), age_at(i));
    const double c = source(i);
    acc = std::exp(-half * (q_prev + q)) * (acc + half * c_prev) + half * c;
    c_prev = c;
    q_prev = q;
  }
  return acc;
}

void lump_sum_rate(const CashflowInputs& in, const PolicySpec& policy, unsigned threads,
                   std::vector<double>& rate, std::vector<double>& immediate) {
  const std::size_t n_t = in.grid.n_t();
  const double step = in.grid.step;
  const double c = policy.age_limit;
  const double pos = c / step;
  const double lower = std::floor(pos + 1e-9);
  const double theta = std::max(0.0, pos - lower);
  const auto c_node = static_cast<long long>(lower);
  const bool aligned = theta <= 1e-9;

  rate.assign(n_t, 0.0);
  immediate.assign(n_t, 0.0);
  parallel_for(n_t, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const long long offset = c_node - static_cast<long long>(i);
      double deferred = diagonal_point_mass(in, offset, i);
      if (!aligned)
        deferred = (1.0 - theta) * deferred + theta * diagonal_point_mass(in, offset + 1, i);
      const double tail =
          integrate_interpolant(in.joint.row(i), step, c, in.grid.y_max);
      immediate[i] = policy.amount * in.death[i] * tail;
      rate[i] = policy.amount * deferred + immediate[i];
    }
  });
}

}  // namespace

CashflowCurve cashflow(const MaritalSolution& solution, const PolicySpec& policy,
                       const DeathDensity& death, const GridSpec& grid, unsigned threads) {
  if (!(solution.grid() == grid)) throw ArgumentError("cashflow: grid does not match solution");
  policy.validate();
  const MortalitySurface& q_ad = policy.mortality();
  if (threads == 0) threads = worker_count();

  const double needed_age = policy.kind == PolicyKind::LifelongAnnuity
                                ? grid.y_max + grid.t_max
                                : std::min(policy.age_limit + grid.step, grid.y_max + grid.t_max);
  if (q_ad.base().t_max() + 1e-9 < needed_age) {
    std::ostringstream msg;
    msg << "cashflow: post-death mortality covers ages up to " << q_ad.base().t_max()
        << " but the policy needs " << needed_age;
    throw ArgumentError(msg.str());
  }
  if (const auto& rho = q_ad.improvement(); rho && rho->t_max() + 1e-9 < grid.t_max)
    throw ArgumentError("cashflow: longevity improvement shorter than grid.t_max");

  const std::size_t n_t = grid.n_t();
  std::vector<double> h(n_t);
  for (std::size_t i = 0; i < n_t; ++i) h[i] = death.density(grid.t(i));
  const CashflowInputs in{grid, solution.joint_density(), h, q_ad};

  if (policy.is_annuity()) return CashflowCurve::from_rate(grid, annuity_rate(in, policy, threads));
  std::vector<double> rate;
  std::vector<double> immediate;
  lump_sum_rate(in, policy, threads, rate, immediate);
  return CashflowCurve::from_rate(grid, std::move(rate), std::move(immediate));
}

double expected_cumulative(const CashflowCurve& cf, double t) {
  if (t <= 0.0) return 0.0;
  return interpolate(cf.cumulative, cf.grid.step, t);
}

double liability(const CashflowCurve& cf, const ShortRate& rate) {
  std::vector<double> discounted(cf.rate.size());
  for (std::size_t i = 0; i < cf.rate.size(); ++i)
    discounted[i] = rate.discount(cf.grid.t(i)) * cf.rate[i];
  return trapezoid(discounted, cf.grid.step);
}

ValuationReport value_policy(const MaritalSolution& solution, const IntensitySet& intensities,
                             const PolicySpec& policy, const ShortRate& rate, unsigned threads) {
  const PolicySpec resolved = policy.resolved(intensities.spouse_mortality);
  ValuationReport report;
  report.policy_name = policy.name;
  report.cashflow = cashflow(solution, resolved, intensities.death, solution.grid(), threads);
  report.discount.resize(report.cashflow.rate.size());
  for (std::size_t i = 0; i < report.discount.size(); ++i)
    report.discount[i] = rate.discount(solution.grid().t(i));
  report.liability = liability(report.cashflow, rate);
  report.death_mass_beyond_horizon =
      std::max(0.0, 1.0 - intensities.death.cumulative(solution.grid().t_max));
  std::ostringstream params;
  params << "policy=" << policy.name << " kind=" << to_string(policy.kind)
         << " amount=" << policy.amount << " age_limit=" << policy.age_limit
         << " step=" << solution.grid().step << " t_max=" << solution.grid().t_max
         << " y_max=" << solution.grid().y_max << " layers=" << solution.nu_max_used();
  report.parameters = params.str();
  return report;
}

IntensitySet member_intensities(const AgeBasedAssumptions& a, double initial_age, double step) {
  auto shift = [&](const IntensityCurve& c) {
    if (initial_age == 0.0) return c.with_domain(c.t_max(), step);
    return c.shifted(initial_age).with_domain(c.t_max() - initial_age, step);
  };
  return IntensitySet{
      shift(a.gamma_by_age), shift(a.sigma_by_age), a.spouse_mortality,
      a.age_at_marriage_by_age.shifted(initial_age),
      DeathDensity::from_mortality(shift(a.insured_mortality_by_age), step)};
}

PortfolioValuation portfolio_value(const std::vector<PortfolioMember>& members,
                                   const AgeBasedAssumptions& assumptions, const ShortRate& rate,
                                   const PortfolioOptions& options) {
  PortfolioValuation result;
  if (members.empty()) return result;
  const unsigned threads = options.threads == 0 ? worker_count() : options.threads;

  // One marital solution per distinct initial age.
  std::map<long long, std::size_t> slot_of_age;
  std::vector<double> ages;
  for (const auto& m : members) {
    if (!(m.initial_age >= 0.0) || m.initial_age >= options.max_age)
      throw ArgumentError("portfolio member initial age outside [0, max_age)");
    if (!is_multiple_of(m.initial_age, options.step))
      throw ArgumentError("portfolio member initial age must be a multiple of the grid step");
    const long long key = std::llround(m.initial_age / options.step);
    if (slot_of_age.emplace(key, ages.size()).second) ages.push_back(m.initial_age);
  }

  struct Solved {
    IntensitySet intensities;
    MaritalSolution solution;
  };
  std::vector<std::unique_ptr<Solved>> solved(ages.size());
  SolverOptions solver = options.solver;
  solver.threads = 1;  // parallelism is across members here
  parallel_for(ages.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      GridSpec grid{options.step, options.max_age - ages[s], options.y_max};
      IntensitySet set = member_intensities(assumptions, ages[s], options.step);
      MaritalSolution sol = solve_marital(set, grid, solver);
      solved[s] = std::make_unique<Solved>(Solved{std::move(set), std::move(sol)});
    }
  });
  result.distinct_solutions = ages.size();

  result.members.resize(members.size());
  parallel_for(members.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const auto& m = members[k];
      const auto& s = *solved[slot_of_age.at(std::llround(m.initial_age / options.step))];
      result.members[k] = MemberValuation{
          m.initial_age, m.weight, value_policy(s.solution, s.intensities, m.policy, rate, 1)};
    }
  });
  for (const auto& m : result.members) result.total += m.weight * m.report.liability;
  return result;
}

}  // namespace pension
