#ifndef PFBO_PFILTER_HPP
#define PFBO_PFILTER_HPP

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pfbo/ssm.hpp"

namespace pfbo {

/// Weighted particle approximation of a filtering distribution.
/// Weights are non-negative and sum to one.
struct ParticleState {
  Eigen::ArrayXd particles;
  Eigen::ArrayXd weights;

  Eigen::Index size() const noexcept { return particles.size(); }
};

struct PFConfig {
  std::size_t particles = 1000;
  /// Resample when ESS < fraction * particles.
  double ess_threshold_fraction = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PFResult {
  double loglik = 0.0;
  /// log p^(y_t | y_{1:t-1}) for t = 1..T.
  std::vector<double> per_step_loglik;
  /// Number of resampling events (diagnostic only).
  std::size_t resample_count = 0;

  friend bool operator==(const PFResult&, const PFResult&) = default;
};

/// Raised when every particle weight vanishes at some step.
class ParticleDegeneracy : public std::runtime_error {
 public:
  ParticleDegeneracy(std::size_t step, const std::string& what) : std::runtime_error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// 1 / sum(w_i^2) for normalized weights.
double ess(const Eigen::Ref<const Eigen::ArrayXd>& weights);

/// Systematic resampling with a single offset u in [0, 1). Positions
/// (u + j) / m are matched against the cumulative weights; the returned
/// ancestor indices are sorted and index i appears floor(m w_i) or
/// ceil(m w_i) times.
std::vector<Eigen::Index> systematic_resample(const Eigen::Ref<const Eigen::ArrayXd>& weights, double u);

/// Optional per-step observer, called after the weight update (before any
/// resampling) with the 0-based step index and the current particle state.
using ParticleObserver = std::function<void(std::size_t step, const ParticleState& state, bool resampled)>;

/// Bootstrap particle filter over a generic model. Returns the log-likelihood
/// estimate as the sum of per-step log predictive likelihoods, each computed
/// as log sum_i w_{t-1}^(i) p(y_t | x_t^(i)) with a max shift.
PFResult particle_filter(const StateSpaceModel& model, const TimeSeries& series, const PFConfig& cfg,
                         const ParticleObserver& observer = {});

/// Particle-filter log-likelihood of the random-walk-plus-noise model at
/// system noise variance `theta`.
PFResult pf_loglik(double theta, const TimeSeries& series, const LinearGaussianModel& model_base,
                   const PFConfig& cfg);

}  // namespace pfbo

#endif  // PFBO_PFILTER_HPP
