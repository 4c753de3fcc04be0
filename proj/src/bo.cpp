#include "pfbo/bo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

#include "pfbo/rng.hpp"
#include "pfbo/univariate.hpp"

namespace pfbo {

namespace {

double sample_sd(std::span<const double> v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double evaluate(const NoisyObjective& objective, double theta, std::uint64_t stream, std::size_t iteration) {
  try {
    const double v = objective(theta, stream);
    if (!std::isfinite(v)) throw std::runtime_error("objective returned a non-finite value");
    return v;
  } catch (const std::exception& e) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "objective evaluation failed at iteration " << iteration << " (theta = " << theta << "): " << e.what();
    throw std::runtime_error(msg.str());
  }
}

/// Incumbent = arg-max of the posterior mean over the unit interval.
OptResult<double> incumbent(const GPPosterior<double>& post, const BOConfig& config) {
  return grid_then_brent([&](double u) { return post.mean(u); }, 0.0, 1.0, config.acquisition_grid,
                         config.brent_tol);
}

void append(BOState& state, const BOConfig& config, std::size_t t, double theta, double raw, double kappa_t) {
  const double z = state.normalizer.standardize(raw);
  state.data.push_back(std::clamp(config.to_unit(theta), 0.0, 1.0), z);
  state.posterior.emplace(state.data, config.hp);
  const OptResult<double> best = incumbent(*state.posterior, config);
  state.trace.records.push_back({t, theta, raw, z, kappa_t, config.from_unit(best.x_star), best.f_star});
}

}  // namespace

Normalizer build_normalizer(const NoisyObjective& objective, std::span<const double> probe_points, std::size_t reps,
                            std::uint64_t seed) {
  if (probe_points.empty()) throw std::invalid_argument("build_normalizer: no probe points");
  if (reps < 2) throw std::invalid_argument("build_normalizer: need at least 2 repetitions per probe");
  double total = 0.0;
  double max_sd = 0.0;
  std::vector<double> values(reps);
  for (std::size_t p = 0; p < probe_points.size(); ++p) {
    for (std::size_t r = 0; r < reps; ++r)
      values[r] = evaluate(objective, probe_points[p], derive_seed(seed, StreamPurpose::normalizer, {p, r}), 0);
    for (double v : values) total += v;
    max_sd = std::max(max_sd, sample_sd(values));
  }
  return {total / static_cast<double>(reps * probe_points.size()), std::max(max_sd, Normalizer::kScaleFloor)};
}

Normalizer normalizer_from_values(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("normalizer_from_values: need at least 2 values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  return {mean, std::max(sample_sd(values), Normalizer::kScaleFloor)};
}

double kappa(std::size_t t, double delta) {
  if (t == 0) throw std::invalid_argument("kappa: t must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("kappa: delta must lie in (0, 1)");
  const double td = static_cast<double>(t);
  return std::sqrt(2.0 * std::log(td * td * std::numbers::pi * std::numbers::pi / (6.0 * delta)));
}

double ucb_value(const GPPosterior<double>& post, double x, double kappa_t) {
  const GPPrediction<double> p = post.predict(x);
  return p.mean + kappa_t * std::sqrt(p.variance);
}

void BOConfig::validate() const {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) throw std::invalid_argument("bounds: require lo < hi");
  hp.validate();
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (init_points.empty()) throw std::invalid_argument("init_points must not be empty");
  for (double p : init_points)
    if (!(p >= lo && p <= hi)) throw std::invalid_argument("init_points must lie within bounds");
  if (!(eps_x > 0.0) || !(eps_f > 0.0)) throw std::invalid_argument("eps_x and eps_f must be > 0");
  if (patience == 0) throw std::invalid_argument("patience must be >= 1");
  if (acquisition_grid < 3) throw std::invalid_argument("acquisition grid needs at least 3 points");
  if (!(brent_tol > 0.0)) throw std::invalid_argument("brent_tol must be > 0");
  if (kappa_override && !(*kappa_override >= 0.0)) throw std::invalid_argument("kappa override must be >= 0");
}

std::vector<double> BOConfig::equispaced(double lo, double hi, std::size_t count) {
  if (count == 1) return {lo};
  std::vector<double> pts(count);
  for (std::size_t i = 0; i < count; ++i)
    pts[i] = i + 1 == count ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return pts;
}

std::span<const BORecord> BOTrace::incumbent_sequence() const noexcept {
  const std::size_t first = initial_count > 0 ? initial_count - 1 : 0;
  if (first >= records.size()) return {};
  return std::span<const BORecord>(records).subspan(first);
}

BOState bo_initialize(const NoisyObjective& objective, const BOConfig& config, const Normalizer& normalizer) {
  config.validate();
  if (!(normalizer.scale > 0.0)) throw std::invalid_argument("normalizer scale must be > 0");
  BOState state;
  state.normalizer = normalizer;
  state.trace.lo = config.lo;
  state.trace.hi = config.hi;
  for (double theta : config.init_points) {
    const double raw = evaluate(objective, theta, derive_seed(config.seed, StreamPurpose::bo_eval, {state.evaluations}), 0);
    ++state.evaluations;
    append(state, config, 0, theta, raw, 0.0);
  }
  state.trace.initial_count = state.trace.records.size();
  return state;
}

const BORecord& bo_step(BOState& state, const NoisyObjective& objective, const BOConfig& config) {
  if (!state.posterior) throw std::logic_error("bo_step: state is not initialized");
  const std::size_t t = state.iteration + 1;
  const double kappa_t = config.kappa_override ? *config.kappa_override : kappa(t, config.delta);
  const GPPosterior<double>& post = *state.posterior;
  const OptResult<double> next = grid_then_brent([&](double u) { return ucb_value(post, u, kappa_t); }, 0.0, 1.0,
                                                 config.acquisition_grid, config.brent_tol);
  const double theta = config.from_unit(next.x_star);
  const double raw = evaluate(objective, theta, derive_seed(config.seed, StreamPurpose::bo_eval, {state.evaluations}), t);
  ++state.evaluations;
  state.iteration = t;
  append(state, config, t, theta, raw, kappa_t);
  return state.trace.records.back();
}

bool check_convergence(const BOTrace& trace, double eps_x, double eps_f, std::size_t patience) {
  const std::span<const BORecord> seq = trace.incumbent_sequence();
  if (patience == 0 || seq.size() < patience + 1) return false;
  const double width = trace.hi - trace.lo;
  for (std::size_t k = seq.size() - patience; k < seq.size(); ++k) {
    const double dx = std::abs(seq[k].incumbent_x - seq[k - 1].incumbent_x) / width;
    const double df = std::abs(seq[k].incumbent_mean - seq[k - 1].incumbent_mean);
    if (!(dx < eps_x && df < eps_f)) return false;
  }
  return true;
}

BOTrace bo_run(const NoisyObjective& objective, const BOConfig& config, const Normalizer& normalizer) {
  BOState state = bo_initialize(objective, config, normalizer);
  while (state.iteration < config.max_iters) {
    bo_step(state, objective, config);
    if (!state.trace.converged_at &&
        check_convergence(state.trace, config.eps_x, config.eps_f, config.patience)) {
      state.trace.converged_at = state.iteration;
      if (config.stop_on_convergence) break;
    }
  }
  return std::move(state.trace);
}

BOTrace bo_run(const NoisyObjective& objective, const BOConfig& config) {
  config.validate();
  const Normalizer normalizer = build_normalizer(objective, config.init_points, config.normalizer_reps,
                                                 derive_seed(config.seed, StreamPurpose::normalizer));
  return bo_run(objective, config, normalizer);
}

GPPosterior<double> posterior_at(const BOTrace& trace, const GPHyperParams<double>& hp, std::size_t iteration) {
  const std::size_t count = std::min(trace.records.size(), trace.initial_count + iteration);
  GPDataset<double> data;
  for (std::size_t i = 0; i < count; ++i) {
    const BORecord& r = trace.records[i];
    data.push_back(std::clamp((r.x_evaluated - trace.lo) / (trace.hi - trace.lo), 0.0, 1.0), r.std_value);
  }
  return fit(std::move(data), hp);
}

}  // namespace pfbo
