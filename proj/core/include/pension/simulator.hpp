#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "pension/grid.hpp"
#include "pension/intensity.hpp"
#include "pension/payments.hpp"
#include "pension/valuation.hpp"

namespace pension {

using Rng = std::mt19937_64;

inline constexpr double kNever = std::numeric_limits<double>::infinity();

/// Independent stream for path `index` under `seed`. Streams depend only on
/// (seed, index), so results do not depend on how paths are scheduled.
Rng path_rng(std::uint64_t seed, std::uint64_t index);

/// Cumulative hazard of a curve at lattice nodes k * step on [0, horizon].
class CumulativeHazard {
 public:
  CumulativeHazard(const IntensityCurve& curve, double step, double horizon);

  double at(double t) const;
  /// Smallest t with H(t) = target, linear inside lattice cells; kNever if
  /// target exceeds H(horizon).
  double inverse(double target) const;
  double horizon() const { return horizon_; }

 private:
  std::vector<double> nodes_;
  double step_;
  double horizon_;
  std::optional<double> constant_rate_;
};

/// Time tau > start with P(tau > t) = exp(-int_start^t rate), or kNever.
double sample_time_from_hazard(const CumulativeHazard& hazard, double start, Rng& rng);
double sample_time_from_hazard(const IntensityCurve& curve, double start, Rng& rng,
                               double step = kDefaultStep);

enum class MaritalStatus {
  NeverMarried,  // (s_0, coffin)
  Married,       // (m_nu, alive)
  Divorced,      // (s_nu, alive)
  Widowed,       // (s_nu, dead)
};

struct MaritalState {
  int nu = 0;
  MaritalStatus status = MaritalStatus::NeverMarried;
  friend bool operator==(const MaritalState&, const MaritalState&) = default;
};

struct PathEvent {
  double time = 0.0;
  MaritalState to;
};

/// One realisation of the marital process on [0, t_max] plus the insured's
/// death time, drawn independently.
struct MaritalPath {
  std::vector<PathEvent> events;
  std::vector<double> spouse_age_at_marriage;  // one per marriage
  double death_time = kNever;

  MaritalState state_at(double t) const;
  bool married_at(double t) const { return state_at(t).status == MaritalStatus::Married; }
  /// Current spouse's age at t; nullopt unless married at t.
  std::optional<double> spouse_age_at(double t) const;
  int marriages_by(double t) const;
  /// Event times strictly increasing and every transition an edge of the
  /// marital transition graph.
  bool satisfies_transition_graph() const;
};

/// Path sampler with precomputed hazard tables.
class MaritalSimulator {
 public:
  MaritalSimulator(const IntensitySet& intensities, const GridSpec& grid);

  MaritalPath simulate(Rng& rng) const;

  /// Death time of a spouse alive at `start` aged `age`, under `mortality`;
  /// kNever if later than `limit`.
  double sample_spouse_death(const MortalitySurface& mortality, double start, double age,
                             double limit, Rng& rng) const;
  double sample_initial_age(double t, Rng& rng) const;
  double sample_insured_death(Rng& rng) const;

  const GridSpec& grid() const { return grid_; }
  const IntensitySet& intensities() const { return intensities_; }

 private:
  IntensitySet intensities_;
  GridSpec grid_;
  CumulativeHazard gamma_;
  CumulativeHazard sigma_;
};

MaritalPath simulate_path(const IntensitySet& intensities, const GridSpec& grid,
                          std::uint64_t seed, std::uint64_t index = 0);

struct SimulationSettings {
  std::uint64_t n_paths = 100000;
  std::uint64_t seed = 1;
  GridSpec grid;
  std::vector<double> f_times;  // times at which to histogram spouse ages
  double bin_width = 1.0;       // spouse-age and stopping-time bins
  int tracked_layers = 4;       // per-nu occupancy and stopping-time histograms
  unsigned threads = 0;
};

/// Normalised histogram with binomial standard errors.
struct Histogram {
  double time = 0.0;  // conditioning time (spouse-age histograms)
  int nu = 0;         // layer index (stopping-time histograms)
  double bin_width = 1.0;
  std::vector<std::uint64_t> counts;
  std::uint64_t overflow = 0;     // samples beyond the last bin
  std::uint64_t denominator = 0;  // paths conditioned on (married at `time`, or all)

  bool available() const { return denominator > 0; }
  double lower_edge(std::size_t b) const { return static_cast<double>(b) * bin_width; }
  double upper_edge(std::size_t b) const { return static_cast<double>(b + 1) * bin_width; }
  double density(std::size_t b) const;
  double standard_error(std::size_t b) const;
};

struct SimulationEstimate {
  GridSpec grid;
  std::uint64_t n_paths = 0;
  std::vector<double> g_hat;  // fraction married at grid nodes
  std::vector<double> g_se;
  /// single[nu][i], nu = 0..tracked; married[nu][i], nu = 1..tracked ([0] empty)
  std::vector<std::vector<double>> single;
  std::vector<std::vector<double>> married;
  /// at_least[nu][i]: fraction with >= nu marriages by t_i
  std::vector<std::vector<double>> at_least_marriages;
  std::vector<Histogram> spouse_age;       // one per f_time
  std::vector<Histogram> marriage_times;   // first entry into m_nu, nu = 1..tracked
  std::vector<Histogram> single_times;     // first entry into s_nu, nu = 1..tracked

  static double binomial_se(double p, std::uint64_t n);
};

SimulationEstimate estimate_marital(const IntensitySet& intensities,
                                    const SimulationSettings& settings);

struct PaymentWindow {
  double from = 0.0;
  double to = kNever;
};

struct PolicyEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::uint64_t n_paths = 0;
  std::uint64_t paying_paths = 0;
};

/// Mean discounted payments per insured, paths truncated at grid.t_max.
/// With `window`, only payments made inside [from, to] count.
PolicyEstimate estimate_policy_value(const IntensitySet& intensities, const PolicySpec& policy,
                                     const ShortRate& rate, const SimulationSettings& settings,
                                     PaymentWindow window = {});

}  // namespace pension
