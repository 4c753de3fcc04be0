#ifndef PFBO_BO_HPP
#define PFBO_BO_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "pfbo/gp.hpp"

namespace pfbo {

/// Noisy scalar objective. The second argument keys the random stream used
/// for this particular evaluation, so repeated calls with the same key return
/// the same value.
using NoisyObjective = std::function<double(double theta, std::uint64_t stream)>;

/// Affine standardization z = (v - mean) / scale.
struct Normalizer {
  double mean = 0.0;
  double scale = 1.0;

  static constexpr double kScaleFloor = 1e-8;

  double standardize(double value) const noexcept { return (value - mean) / scale; }
  double restore(double z) const noexcept { return mean + scale * z; }
};

/// Evaluates the objective `reps` times at every probe point. The mean is the
/// grand mean of all evaluations and the scale is the largest per-point
/// sample standard deviation (floored at 1e-8).
Normalizer build_normalizer(const NoisyObjective& objective, std::span<const double> probe_points, std::size_t reps,
                            std::uint64_t seed);

/// Sample mean and sample standard deviation of a set of values (scale
/// floored at 1e-8). Used for noise-free objectives, where the per-point
/// spread is zero.
Normalizer normalizer_from_values(std::span<const double> values);

/// sqrt(2 log(t^2 pi^2 / (6 delta))), t >= 1, delta in (0, 1).
double kappa(std::size_t t, double delta);

/// mean + kappa_t * sd of the posterior at normalized input x.
double ucb_value(const GPPosterior<double>& post, double x, double kappa_t);

struct BOConfig {
  double lo = 0.005;
  double hi = 0.025;
  GPHyperParams<double> hp{};
  double delta = 0.1;
  std::size_t max_iters = 30;
  std::vector<double> init_points = {0.005, 0.010, 0.015, 0.020, 0.025};
  /// Incumbent change threshold, normalized input units.
  double eps_x = 0.01;
  /// Incumbent mean change threshold, standardized objective units.
  double eps_f = 0.1;
  std::size_t patience = 3;
  std::size_t acquisition_grid = 201;
  double brent_tol = 1e-6;
  std::uint64_t seed = 0;
  /// Stop at the first iteration where the convergence test passes. When
  /// false the run always uses the full budget and only records it.
  bool stop_on_convergence = false;
  /// Replaces the kappa_t schedule with a constant when set.
  std::optional<double> kappa_override{};
  /// Repetitions per init point when bo_run builds its own normalizer.
  std::size_t normalizer_reps = 10;

  void validate() const;
  double to_unit(double theta) const noexcept { return (theta - lo) / (hi - lo); }
  double from_unit(double u) const noexcept { return u >= 1.0 ? hi : lo + u * (hi - lo); }
  /// Equispaced points over [lo, hi], both ends included.
  static std::vector<double> equispaced(double lo, double hi, std::size_t count);
};

/// One evaluation. Initial-design rows carry t = 0 and kappa = 0;
/// acquisition rows carry t = 1, 2, ...
struct BORecord {
  std::size_t t = 0;
  double x_evaluated = 0.0;
  double raw_value = 0.0;
  double std_value = 0.0;
  double kappa = 0.0;
  double incumbent_x = 0.0;
  double incumbent_mean = 0.0;

  friend bool operator==(const BORecord&, const BORecord&) = default;
};

struct BOTrace {
  double lo = 0.0;
  double hi = 1.0;
  /// Number of leading initial-design rows in `records`.
  std::size_t initial_count = 0;
  std::vector<BORecord> records;
  /// First acquisition iteration at which the convergence test passed.
  std::optional<std::size_t> converged_at{};

  /// Incumbent after the initial design (i = 0) followed by one per
  /// acquisition iteration (i = 1..t).
  std::span<const BORecord> incumbent_sequence() const noexcept;

  friend bool operator==(const BOTrace&, const BOTrace&) = default;
};

/// Mutable optimizer state threaded through bo_step.
struct BOState {
  Normalizer normalizer{};
  GPDataset<double> data{};
  std::optional<GPPosterior<double>> posterior{};
  BOTrace trace{};
  std::size_t iteration = 0;
  std::size_t evaluations = 0;
};

/// Evaluates the initial design and fits the first posterior.
BOState bo_initialize(const NoisyObjective& objective, const BOConfig& config, const Normalizer& normalizer);

/// Maximizes UCB over [0, 1], evaluates the objective there, refits and
/// appends one record with the new incumbent.
const BORecord& bo_step(BOState& state, const NoisyObjective& objective, const BOConfig& config);

/// True when, over the last `patience` consecutive incumbent pairs, both the
/// normalized input change is < eps_x and the standardized mean change is
/// < eps_f. Needs at least patience + 1 incumbents.
bool check_convergence(const BOTrace& trace, double eps_x, double eps_f, std::size_t patience);

BOTrace bo_run(const NoisyObjective& objective, const BOConfig& config, const Normalizer& normalizer);

/// Same, with a normalizer built from `normalizer_reps` evaluations at each
/// init point.
BOTrace bo_run(const NoisyObjective& objective, const BOConfig& config);

/// Posterior implied by the first `initial_count + iteration` records of a trace.
GPPosterior<double> posterior_at(const BOTrace& trace, const GPHyperParams<double>& hp, std::size_t iteration);

}  // namespace pfbo

#endif  // PFBO_BO_HPP
