#include "pfbo/pfilter.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "pfbo/rng.hpp"

namespace pfbo {

void PFConfig::validate() const {
  if (particles == 0) throw std::invalid_argument("particle count must be >= 1");
  if (!(ess_threshold_fraction > 0.0 && ess_threshold_fraction <= 1.0))
    throw std::invalid_argument("ess_threshold_fraction must lie in (0, 1]");
}

namespace {

void check_normalized(const Eigen::Ref<const Eigen::ArrayXd>& weights, const char* who) {
  if (weights.size() == 0) throw std::invalid_argument(std::string(who) + ": empty weight vector");
  if ((weights < 0.0).any() || !weights.allFinite())
    throw std::invalid_argument(std::string(who) + ": weights must be finite and non-negative");
  const double total = weights.sum();
  if (std::abs(total - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg.precision(17);
    msg << who << ": weights are not normalized (sum = " << total << ")";
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

double ess(const Eigen::Ref<const Eigen::ArrayXd>& weights) {
  check_normalized(weights, "ess");
  return 1.0 / weights.square().sum();
}

std::vector<Eigen::Index> systematic_resample(const Eigen::Ref<const Eigen::ArrayXd>& weights, double u) {
  if (!(u >= 0.0 && u < 1.0)) throw std::invalid_argument("systematic_resample: u must lie in [0, 1)");
  check_normalized(weights, "systematic_resample");
  const Eigen::Index m = weights.size();

  // Last index with positive weight absorbs positions lost to rounding in the
  // cumulative sum.
  Eigen::Index last = m - 1;
  while (last > 0 && weights[last] == 0.0) --last;

  std::vector<Eigen::Index> ancestors(static_cast<std::size_t>(m));
  const double total = weights.sum();
  double cumulative = weights[0] / total;
  Eigen::Index i = 0;
  for (Eigen::Index j = 0; j < m; ++j) {
    const double position = (u + static_cast<double>(j)) / static_cast<double>(m);
    while (i < last && position >= cumulative) cumulative += weights[++i] / total;
    ancestors[static_cast<std::size_t>(j)] = i;
  }
  return ancestors;
}

PFResult particle_filter(const StateSpaceModel& model, const TimeSeries& series, const PFConfig& cfg,
                         const ParticleObserver& observer) {
  cfg.validate();
  const auto m = static_cast<Eigen::Index>(cfg.particles);
  const double inv_m = 1.0 / static_cast<double>(m);
  const double ess_threshold = cfg.ess_threshold_fraction * static_cast<double>(m);
  Rng rng(derive_seed(cfg.seed, StreamPurpose::filter));

  ParticleState state{Eigen::ArrayXd(m), Eigen::ArrayXd::Constant(m, inv_m)};
  Eigen::ArrayXd log_density(m);
  Eigen::ArrayXd scratch(m);
  model.sample_initial(state.particles, rng);

  PFResult result;
  result.per_step_loglik.reserve(series.length());
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();

  for (std::size_t t = 0; t < series.length(); ++t) {
    model.sample_transition(state.particles, rng);
    model.observation_log_density(state.particles, series[t], log_density);

    // Shift by the largest log density among particles that still carry weight.
    const double shift = (state.weights > 0.0).select(log_density, neg_inf).maxCoeff();
    if (!std::isfinite(shift)) {
      std::ostringstream msg;
      msg << "particle degeneracy at step " << t + 1 << ": no particle has finite likelihood";
      throw ParticleDegeneracy(t + 1, msg.str());
    }
    state.weights *= (log_density - shift).exp();
    const double mass = state.weights.sum();
    if (!(mass > 0.0) || !std::isfinite(mass)) {
      std::ostringstream msg;
      msg << "particle degeneracy at step " << t + 1 << ": all particle likelihoods underflowed";
      throw ParticleDegeneracy(t + 1, msg.str());
    }
    const double step_ll = shift + std::log(mass);
    result.per_step_loglik.push_back(step_ll);
    result.loglik += step_ll;

    state.weights /= mass;
    state.weights /= state.weights.sum();

    bool resampled = false;
    if (1.0 / state.weights.square().sum() < ess_threshold) {
      const auto ancestors = systematic_resample(state.weights, rng.uniform());
      for (Eigen::Index j = 0; j < m; ++j) scratch[j] = state.particles[ancestors[static_cast<std::size_t>(j)]];
      state.particles.swap(scratch);
      state.weights.setConstant(inv_m);
      resampled = true;
      ++result.resample_count;
    }
    if (observer) observer(t, state, resampled);
  }
  return result;
}

PFResult pf_loglik(double theta, const TimeSeries& series, const LinearGaussianModel& model_base,
                   const PFConfig& cfg) {
  if (!(theta >= 0.0)) throw std::invalid_argument("pf_loglik: theta must be >= 0");
  return particle_filter(model_base.with_tau2(theta), series, cfg);
}

}  // namespace pfbo
