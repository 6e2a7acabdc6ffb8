#include "pension/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "pension/errors.hpp"
#include "pension/parallel.hpp"

namespace pension {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform on [0, 1) from the top 53 bits; fixed across standard libraries.
double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double exponential1(Rng& rng) { return -std::log1p(-uniform01(rng)); }

}  // namespace

Rng path_rng(std::uint64_t seed, std::uint64_t index) {
  return Rng(splitmix64(splitmix64(seed) ^ index));
}

// ---------------------------------------------------------------------------

CumulativeHazard::CumulativeHazard(const IntensityCurve& curve, double step, double horizon)
    : step_(step), horizon_(horizon) {
  if (!(step > 0.0) || !(horizon > 0.0)) throw ArgumentError("CumulativeHazard: bad lattice");
  if (curve.is_constant()) {
    constant_rate_ = curve.rate(0.0);
    return;
  }
  const auto cells = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
  nodes_.resize(cells + 1);
  for (std::size_t k = 0; k <= cells; ++k)
    nodes_[k] = curve.integrated_hazard(0.0, std::min(static_cast<double>(k) * step, horizon));
}

double CumulativeHazard::at(double t) const {
  if (constant_rate_) return *constant_rate_ * std::min(t, horizon_);
  return interpolate(nodes_, step_, std::min(t, horizon_));
}

double CumulativeHazard::inverse(double target) const {
  if (constant_rate_) {
    if (*constant_rate_ <= 0.0) return kNever;
    const double t = target / *constant_rate_;
    return t <= horizon_ ? t : kNever;
  }
  if (target > nodes_.back()) return kNever;
  const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), target);
  const auto k = static_cast<std::size_t>(it - nodes_.begin());
  if (k == 0) return 0.0;
  const double h0 = nodes_[k - 1];
  const double h1 = nodes_[k];
  const double t = (static_cast<double>(k - 1) + (target - h0) / (h1 - h0)) * step_;
  return std::min(t, horizon_);
}

double sample_time_from_hazard(const CumulativeHazard& hazard, double start, Rng& rng) {
  const double target = hazard.at(start) + exponential1(rng);
  const double t = hazard.inverse(target);
  return t == kNever ? kNever : std::max(t, start);
}

double sample_time_from_hazard(const IntensityCurve& curve, double start, Rng& rng, double step) {
  return sample_time_from_hazard(CumulativeHazard(curve, step, curve.t_max()), start, rng);
}

// ---------------------------------------------------------------------------

MaritalState MaritalPath::state_at(double t) const {
  MaritalState state;
  for (const auto& e : events) {
    if (e.time > t) break;
    state = e.to;
  }
  return state;
}

std::optional<double> MaritalPath::spouse_age_at(double t) const {
  const MaritalState s = state_at(t);
  if (s.status != MaritalStatus::Married) return std::nullopt;
  double married_since = 0.0;
  for (const auto& e : events) {
    if (e.time > t) break;
    if (e.to.status == MaritalStatus::Married) married_since = e.time;
  }
  return spouse_age_at_marriage[static_cast<std::size_t>(s.nu - 1)] + (t - married_since);
}

int MaritalPath::marriages_by(double t) const {
  int n = 0;
  for (const auto& e : events)
    if (e.time <= t && e.to.status == MaritalStatus::Married) ++n;
  return n;
}

bool MaritalPath::satisfies_transition_graph() const {
  MaritalState state;
  double last = -1.0;
  std::size_t marriages = 0;
  for (const auto& e : events) {
    if (!(e.time > last) || e.time < 0.0) return false;
    last = e.time;
    const bool single = state.status != MaritalStatus::Married;
    switch (e.to.status) {
      case MaritalStatus::Married:
        if (!single || e.to.nu != state.nu + 1) return false;
        ++marriages;
        break;
      case MaritalStatus::Divorced:
      case MaritalStatus::Widowed:
        if (single || e.to.nu != state.nu) return false;
        break;
      case MaritalStatus::NeverMarried:
        return false;
    }
    state = e.to;
  }
  return marriages == spouse_age_at_marriage.size();
}

// ---------------------------------------------------------------------------

MaritalSimulator::MaritalSimulator(const IntensitySet& intensities, const GridSpec& grid)
    : intensities_(intensities),
      grid_(grid),
      gamma_(intensities.gamma, grid.step, grid.t_max),
      sigma_(intensities.sigma, grid.step, grid.t_max) {
  grid.validate();
}

double MaritalSimulator::sample_spouse_death(const MortalitySurface& mortality, double start,
                                             double age, double limit, Rng& rng) const {
  const double target = exponential1(rng);
  if (mortality.is_identically_zero() || !(limit > start)) return kNever;
  const double age_cap = mortality.base().t_max();
  const double time_cap = mortality.improvement() ? mortality.improvement()->t_max() : kNever;
  auto rate = [&](double x) {
    return mortality.rate(std::min(x, time_cap), std::min(age + (x - start), age_cap));
  };

  if (mortality.time_independent() && mortality.base().is_constant()) {
    const double q = mortality.base().rate(0.0);
    const double t = start + target / q;
    return t < limit ? t : kNever;
  }

  // Trapezoid hazard along the age diagonal with breakpoints at lattice
  // nodes; the cumulative hazard is linear inside the crossing cell.
  const double step = grid_.step;
  double x0 = start;
  double r0 = rate(x0);
  double acc = 0.0;
  auto k = static_cast<long long>(std::floor(start / step)) + 1;
  while (x0 < limit) {
    const double x1 = std::min(static_cast<double>(k) * step, limit);
    const double r1 = rate(x1);
    const double dh = 0.5 * (r0 + r1) * (x1 - x0);
    if (acc + dh >= target && dh > 0.0) return x0 + (target - acc) / dh * (x1 - x0);
    acc += dh;
    x0 = x1;
    r0 = r1;
    ++k;
  }
  return kNever;
}

double MaritalSimulator::sample_initial_age(double t, Rng& rng) const {
  const auto& phi = intensities_.age_at_marriage;
  const double ts = t + phi.time_shift();
  return std::visit(
      [&](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, UniformAges>) {
          const double lo = p.lo + p.lo_slope * ts;
          const double hi = p.hi + p.hi_slope * ts;
          return lo + uniform01(rng) * (hi - lo);
        } else if constexpr (std::is_same_v<P, TruncatedNormalAges>) {
          // Invert the upper tail: P(Y > y) = V * P(Y > 0), V in (0, 1].
          const double mean = ts + p.offset;
          const double mass_above_zero = 0.5 * std::erfc(-mean / (p.sd * std::numbers::sqrt2));
          const double v = 1.0 - uniform01(rng);
          const double tail = std::clamp(2.0 * v * mass_above_zero, 1e-300, 2.0 - 1e-16);
          const double y = mean + p.sd * std::numbers::sqrt2 * boost::math::erfc_inv(tail);
          return std::max(0.0, y);
        } else {
          // Mixture of the two bracketing rows, each a piecewise-linear
          // density in age sampled by inverting its quadratic CDF.
          std::size_t row = 0;
          if (ts >= p.times.back()) {
            row = p.times.size() - 1;
          } else if (ts > p.times.front()) {
            const auto it = std::upper_bound(p.times.begin(), p.times.end(), ts);
            const auto k = static_cast<std::size_t>(it - p.times.begin()) - 1;
            const double w = (ts - p.times[k]) / (p.times[k + 1] - p.times[k]);
            row = uniform01(rng) < w ? k + 1 : k;
          }
          const auto& ages = p.ages;
          const auto& vals = p.values[row];
          double total = 0.0;
          for (std::size_t s = 0; s + 1 < ages.size(); ++s)
            total += 0.5 * (vals[s] + vals[s + 1]) * (ages[s + 1] - ages[s]);
          double target = uniform01(rng) * total;
          for (std::size_t s = 0; s + 1 < ages.size(); ++s) {
            const double width = ages[s + 1] - ages[s];
            const double mass = 0.5 * (vals[s] + vals[s + 1]) * width;
            if (target > mass && s + 2 < ages.size()) {
              target -= mass;
              continue;
            }
            const double slope = (vals[s + 1] - vals[s]) / width;
            double x;
            if (std::abs(slope) < 1e-14) {
              x = vals[s] > 0.0 ? target / vals[s] : 0.5 * width;
            } else {
              const double disc = vals[s] * vals[s] + 2.0 * slope * target;
              x = (-vals[s] + std::sqrt(std::max(0.0, disc))) / slope;
            }
            return ages[s] + std::clamp(x, 0.0, width);
          }
          return ages.back();
        }
      },
      phi.parameterization());
}

double MaritalSimulator::sample_insured_death(Rng& rng) const {
  const auto& death = intensities_.death;
  const double u = uniform01(rng);
  const auto cdf = death.cdf_nodes();
  if (cdf.empty() || u >= cdf.back()) return kNever;
  const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
  const auto k = static_cast<std::size_t>(it - cdf.begin());
  if (k == 0) return 0.0;
  const double c0 = cdf[k - 1];
  const double c1 = cdf[k];
  const double step = death.quadrature_step();
  const double t = (static_cast<double>(k - 1) + (u - c0) / (c1 - c0)) * step;
  return std::min(t, death.t_max());
}

MaritalPath MaritalSimulator::simulate(Rng& rng) const {
  MaritalPath path;
  path.death_time = sample_insured_death(rng);
  const double t_max = grid_.t_max;
  double t = 0.0;
  int nu = 0;
  for (;;) {
    const double married = sample_time_from_hazard(gamma_, t, rng);
    if (!(married < t_max)) break;
    ++nu;
    const double age = sample_initial_age(married, rng);
    path.events.push_back({married, {nu, MaritalStatus::Married}});
    path.spouse_age_at_marriage.push_back(age);

    const double divorce = sample_time_from_hazard(sigma_, married, rng);
    const double limit = std::min(divorce, t_max);
    const double widowed =
        sample_spouse_death(intensities_.spouse_mortality, married, age, limit, rng);
    if (widowed < limit) {
      path.events.push_back({widowed, {nu, MaritalStatus::Widowed}});
      t = widowed;
    } else if (divorce < t_max) {
      path.events.push_back({divorce, {nu, MaritalStatus::Divorced}});
      t = divorce;
    } else {
      break;
    }
  }
  return path;
}

MaritalPath simulate_path(const IntensitySet& intensities, const GridSpec& grid,
                          std::uint64_t seed, std::uint64_t index) {
  MaritalSimulator sim(intensities, grid);
  Rng rng = path_rng(seed, index);
  return sim.simulate(rng);
}

// ---------------------------------------------------------------------------

double Histogram::density(std::size_t b) const {
  if (!available()) return 0.0;
  return static_cast<double>(counts[b]) / (static_cast<double>(denominator) * bin_width);
}

double Histogram::standard_error(std::size_t b) const {
  if (!available()) return 0.0;
  const double p = static_cast<double>(counts[b]) / static_cast<double>(denominator);
  return SimulationEstimate::binomial_se(p, denominator) / bin_width;
}

double SimulationEstimate::binomial_se(double p, std::uint64_t n) {
  if (n == 0) return 0.0;
  return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

namespace {

struct MaritalTally {
  std::size_t n_t = 0;
  std::vector<long long> married_diff;
  std::vector<std::vector<long long>> single_diff;   // nu = 0..K
  std::vector<std::vector<long long>> married_nu;    // nu = 0..K ([0] unused)
  std::vector<std::vector<long long>> at_least;      // nu = 0..K ([0] unused)
  std::vector<std::vector<std::uint64_t>> age_counts;
  std::vector<std::uint64_t> age_overflow;
  std::vector<std::uint64_t> married_at_f;
  std::vector<std::vector<std::uint64_t>> m_times;   // nu = 0..K ([0] unused)
  std::vector<std::vector<std::uint64_t>> s_times;
  std::vector<std::uint64_t> m_overflow;
  std::vector<std::uint64_t> s_overflow;

  MaritalTally(std::size_t nt, int k, std::size_t n_f, std::size_t age_bins,
               std::size_t time_bins)
      : n_t(nt),
        married_diff(nt + 1, 0),
        single_diff(static_cast<std::size_t>(k + 1), std::vector<long long>(nt + 1, 0)),
        married_nu(single_diff),
        at_least(single_diff),
        age_counts(n_f, std::vector<std::uint64_t>(age_bins, 0)),
        age_overflow(n_f, 0),
        married_at_f(n_f, 0),
        m_times(static_cast<std::size_t>(k + 1), std::vector<std::uint64_t>(time_bins, 0)),
        s_times(m_times),
        m_overflow(static_cast<std::size_t>(k + 1), 0),
        s_overflow(static_cast<std::size_t>(k + 1), 0) {}

  void merge(const MaritalTally& o) {
    auto add = [](auto& a, const auto& b) {
      for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    };
    add(married_diff, o.married_diff);
    for (std::size_t k = 0; k < single_diff.size(); ++k) {
      add(single_diff[k], o.single_diff[k]);
      add(married_nu[k], o.married_nu[k]);
      add(at_least[k], o.at_least[k]);
      add(m_times[k], o.m_times[k]);
      add(s_times[k], o.s_times[k]);
    }
    add(m_overflow, o.m_overflow);
    add(s_overflow, o.s_overflow);
    for (std::size_t f = 0; f < age_counts.size(); ++f) add(age_counts[f], o.age_counts[f]);
    add(age_overflow, o.age_overflow);
    add(married_at_f, o.married_at_f);
  }
};

std::vector<double> prefix_fraction(const std::vector<long long>& diff, std::size_t n_t,
                                    std::uint64_t n) {
  std::vector<double> out(n_t);
  long long running = 0;
  for (std::size_t i = 0; i < n_t; ++i) {
    running += diff[i];
    out[i] = static_cast<double>(running) / static_cast<double>(n);
  }
  return out;
}

}  // namespace

SimulationEstimate estimate_marital(const IntensitySet& intensities,
                                    const SimulationSettings& settings) {
  if (settings.n_paths == 0) throw ArgumentError("estimate_marital: n_paths must be >= 1");
  if (!(settings.bin_width > 0.0)) throw ArgumentError("estimate_marital: bin width must be > 0");
  const GridSpec& grid = settings.grid;
  const MaritalSimulator sim(intensities, grid);
  const std::size_t n_t = grid.n_t();
  const int k_max = std::max(1, settings.tracked_layers);
  const auto uk = static_cast<std::size_t>(k_max);
  const auto age_bins = static_cast<std::size_t>(std::ceil(grid.y_max / settings.bin_width));
  const auto time_bins = static_cast<std::size_t>(std::ceil(grid.t_max / settings.bin_width));
  const std::size_t n_f = settings.f_times.size();
  const double step = grid.step;

  auto node_at_or_after = [&](double x) -> std::size_t {
    if (!(x < kNever)) return n_t;
    return std::min(n_t, static_cast<std::size_t>(std::ceil(x / step)));
  };

  MaritalTally total(n_t, k_max, n_f, age_bins, time_bins);
  std::mutex merge_mutex;
  const unsigned threads = settings.threads == 0 ? worker_count() : settings.threads;

  parallel_for(settings.n_paths, threads, [&](std::size_t begin, std::size_t end) {
    MaritalTally tally(n_t, k_max, n_f, age_bins, time_bins);
    auto add_interval = [&](std::vector<long long>& diff, double a, double b) {
      const std::size_t i0 = node_at_or_after(a);
      const std::size_t i1 = node_at_or_after(b);
      if (i0 < i1) {
        ++diff[i0];
        --diff[i1];
      }
    };
    for (std::size_t p = begin; p < end; ++p) {
      Rng rng = path_rng(settings.seed, p);
      const MaritalPath path = sim.simulate(rng);

      MaritalState state;
      double since = 0.0;
      auto close = [&](double until) {
        if (state.status == MaritalStatus::Married) {
          add_interval(tally.married_diff, since, until);
          if (state.nu <= k_max) add_interval(tally.married_nu[static_cast<std::size_t>(state.nu)], since, until);
        } else if (state.nu <= k_max) {
          add_interval(tally.single_diff[static_cast<std::size_t>(state.nu)], since, until);
        }
      };
      for (const auto& e : path.events) {
        close(e.time);
        state = e.to;
        since = e.time;
        if (state.nu <= k_max) {
          const auto nu = static_cast<std::size_t>(state.nu);
          const auto bin = static_cast<std::size_t>(e.time / settings.bin_width);
          if (state.status == MaritalStatus::Married) {
            add_interval(tally.at_least[nu], e.time, kNever);
            if (bin < time_bins) ++tally.m_times[nu][bin]; else ++tally.m_overflow[nu];
          } else {
            if (bin < time_bins) ++tally.s_times[nu][bin]; else ++tally.s_overflow[nu];
          }
        }
      }
      close(kNever);

      for (std::size_t f = 0; f < n_f; ++f) {
        const auto age = path.spouse_age_at(settings.f_times[f]);
        if (!age) continue;
        ++tally.married_at_f[f];
        const auto bin = static_cast<std::size_t>(std::max(0.0, *age) / settings.bin_width);
        if (bin < age_bins) ++tally.age_counts[f][bin]; else ++tally.age_overflow[f];
      }
    }
    std::lock_guard lock(merge_mutex);
    total.merge(tally);  // integer counts: merge order is irrelevant
  });

  SimulationEstimate est;
  est.grid = grid;
  est.n_paths = settings.n_paths;
  est.g_hat = prefix_fraction(total.married_diff, n_t, settings.n_paths);
  est.g_se.resize(n_t);
  for (std::size_t i = 0; i < n_t; ++i)
    est.g_se[i] = SimulationEstimate::binomial_se(est.g_hat[i], settings.n_paths);
  est.single.resize(uk + 1);
  est.married.resize(uk + 1);
  est.at_least_marriages.resize(uk + 1);
  for (std::size_t nu = 0; nu <= uk; ++nu) {
    est.single[nu] = prefix_fraction(total.single_diff[nu], n_t, settings.n_paths);
    if (nu > 0) {
      est.married[nu] = prefix_fraction(total.married_nu[nu], n_t, settings.n_paths);
      est.at_least_marriages[nu] = prefix_fraction(total.at_least[nu], n_t, settings.n_paths);
    }
  }
  for (std::size_t f = 0; f < n_f; ++f) {
    Histogram h;
    h.time = settings.f_times[f];
    h.bin_width = settings.bin_width;
    h.counts = std::move(total.age_counts[f]);
    h.overflow = total.age_overflow[f];
    h.denominator = total.married_at_f[f];
    est.spouse_age.push_back(std::move(h));
  }
  for (std::size_t nu = 1; nu <= uk; ++nu) {
    Histogram m;
    m.nu = static_cast<int>(nu);
    m.bin_width = settings.bin_width;
    m.counts = std::move(total.m_times[nu]);
    m.overflow = total.m_overflow[nu];
    m.denominator = settings.n_paths;
    est.marriage_times.push_back(std::move(m));
    Histogram s;
    s.nu = static_cast<int>(nu);
    s.bin_width = settings.bin_width;
    s.counts = std::move(total.s_times[nu]);
    s.overflow = total.s_overflow[nu];
    s.denominator = settings.n_paths;
    est.single_times.push_back(std::move(s));
  }
  return est;
}

// ---------------------------------------------------------------------------

namespace {

// int_0^t discount, exact for the piecewise-linear interpolant of the
// discount factor on the grid.
class AnnuityFactor {
 public:
  AnnuityFactor(const ShortRate& rate, const GridSpec& grid) : step_(grid.step) {
    disc_.resize(grid.n_t());
    for (std::size_t i = 0; i < disc_.size(); ++i) disc_[i] = rate.discount(grid.t(i));
    cum_ = cumulative_trapezoid(disc_, step_);
  }
  double discount(double t) const { return interpolate(disc_, step_, t); }
  double integral_to(double t) const {
    if (t <= 0.0) return 0.0;
    const double pos = t / step_;
    const auto k = static_cast<std::size_t>(std::floor(pos));
    if (k + 1 >= disc_.size()) return cum_.back();
    const double w = pos - static_cast<double>(k);
    const double d_t = (1.0 - w) * disc_[k] + w * disc_[k + 1];
    return cum_[k] + 0.5 * (disc_[k] + d_t) * (t - static_cast<double>(k) * step_);
  }

 private:
  double step_;
  std::vector<double> disc_;
  std::vector<double> cum_;
};

constexpr std::size_t kPolicyBlock = 4096;

}  // namespace

PolicyEstimate estimate_policy_value(const IntensitySet& intensities, const PolicySpec& policy,
                                     const ShortRate& rate, const SimulationSettings& settings,
                                     PaymentWindow window) {
  if (settings.n_paths == 0) throw ArgumentError("estimate_policy_value: n_paths must be >= 1");
  policy.validate();
  const PolicySpec resolved = policy.resolved(intensities.spouse_mortality);
  const MortalitySurface& q_ad = resolved.mortality();
  const GridSpec& grid = settings.grid;
  const MaritalSimulator sim(intensities, grid);
  const AnnuityFactor annuity(rate, grid);
  const double t_max = grid.t_max;
  const double c = resolved.age_limit;
  const double from = std::max(0.0, window.from);
  const double to = std::min(window.to, t_max);

  auto paid_between = [&](double a, double b) {
    a = std::max(a, from);
    b = std::min(b, to);
    return b > a ? annuity.integral_to(b) - annuity.integral_to(a) : 0.0;
  };
  auto paid_at = [&](double s) {
    return (s >= from && s <= to) ? annuity.discount(s) : 0.0;
  };

  auto path_value = [&](std::uint64_t p, bool& paying) -> double {
    Rng rng = path_rng(settings.seed, p);
    const MaritalPath path = sim.simulate(rng);
    const double T = path.death_time;
    paying = false;
    if (!(T <= t_max)) return 0.0;
    const auto spouse_age = path.spouse_age_at(T);
    if (!spouse_age) return 0.0;
    const double y = *spouse_age;
    double unit = 0.0;
    switch (resolved.kind) {
      case PolicyKind::LifelongAnnuity: {
        const double death = sim.sample_spouse_death(q_ad, T, y, t_max, rng);
        unit = paid_between(T, std::min(death, t_max));
        break;
      }
      case PolicyKind::TerminatingAnnuity: {
        if (y > c) break;
        const double stop = std::min(T + (c - y), t_max);
        const double death = sim.sample_spouse_death(q_ad, T, y, stop, rng);
        unit = paid_between(T, std::min(death, stop));
        break;
      }
      case PolicyKind::LumpSumAtAge: {
        if (y >= c) {
          unit = paid_at(T);
          break;
        }
        const double trigger = T + (c - y);
        if (trigger > t_max) break;
        const double death = sim.sample_spouse_death(q_ad, T, y, trigger, rng);
        if (!(death < trigger)) unit = paid_at(trigger);
        break;
      }
    }
    paying = unit > 0.0;
    return resolved.amount * unit;
  };

  const std::size_t n_blocks = (settings.n_paths + kPolicyBlock - 1) / kPolicyBlock;
  std::vector<double> sums(n_blocks, 0.0);
  std::vector<double> squares(n_blocks, 0.0);
  std::vector<std::uint64_t> paying(n_blocks, 0);
  const unsigned threads = settings.threads == 0 ? worker_count() : settings.threads;
  parallel_for(n_blocks, threads, [&](std::size_t b_begin, std::size_t b_end) {
    for (std::size_t b = b_begin; b < b_end; ++b) {
      const std::uint64_t p_end = std::min<std::uint64_t>(settings.n_paths, (b + 1) * kPolicyBlock);
      for (std::uint64_t p = b * kPolicyBlock; p < p_end; ++p) {
        bool pays = false;
        const double v = path_value(p, pays);
        sums[b] += v;
        squares[b] += v * v;
        paying[b] += pays ? 1 : 0;
      }
    }
  });

  double sum = 0.0;
  double sq = 0.0;
  PolicyEstimate out;
  for (std::size_t b = 0; b < n_blocks; ++b) {
    sum += sums[b];
    sq += squares[b];
    out.paying_paths += paying[b];
  }
  const auto n = static_cast<double>(settings.n_paths);
  out.n_paths = settings.n_paths;
  out.mean = sum / n;
  const double var = settings.n_paths > 1 ? std::max(0.0, (sq - n * out.mean * out.mean) / (n - 1.0)) : 0.0;
  out.standard_error = std::sqrt(var / n);
  return out;
}

}  // namespace pension
