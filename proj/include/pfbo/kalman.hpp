#ifndef PFBO_KALMAN_HPP
#define PFBO_KALMAN_HPP

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>

#include "pfbo/ssm.hpp"

namespace pfbo {

/// Filtered mean and variance of the scalar state.
template <typename Scalar = double>
struct KalmanState {
  Scalar mean{};
  Scalar var{};
};

/// Exact log-likelihood of the random-walk-plus-noise model with system noise
/// variance `theta`; obs_var and the x_0 prior come from `model`.
///
/// The recursion starts from x_0 ~ N(init_mean, init_var) and applies the
/// transition before the first observation, so
///   y_1 | - ~ N(init_mean, init_var + theta + obs_var).
template <typename Scalar = double>
Scalar kalman_loglik(Scalar theta, const TimeSeries& series, const LinearGaussianModel& model) {
  using std::log;
  if (!(theta >= 0)) throw std::invalid_argument("kalman_loglik: theta must be >= 0");
  const Scalar obs_var = static_cast<Scalar>(model.obs_var());
  const Scalar log_two_pi = log(2 * std::numbers::pi_v<Scalar>);
  KalmanState<Scalar> s{static_cast<Scalar>(model.init_mean()), static_cast<Scalar>(model.init_var())};
  Scalar ll = 0;
  for (double y_raw : series.values()) {
    const Scalar y = static_cast<Scalar>(y_raw);
    const Scalar pred_var = s.var + theta;
    const Scalar innov_var = pred_var + obs_var;
    const Scalar innov = y - s.mean;
    ll -= (log_two_pi + log(innov_var) + innov * innov / innov_var) / 2;
    const Scalar gain = pred_var / innov_var;
    s.mean += gain * innov;
    s.var = pred_var * obs_var / innov_var;
  }
  return ll;
}

/// Maximum of the exact log-likelihood over theta in [lo, hi].
struct MLEResult {
  double theta_star = 0.0;
  double loglik_star = 0.0;

  friend bool operator==(const MLEResult&, const MLEResult&) = default;
};

struct MLEOptions {
  std::size_t grid_points = 201;
  double tol = 1e-9;
};

/// Grid scan then Brent over the closed interval; endpoints are valid answers.
MLEResult kalman_mle(const TimeSeries& series, double lo, double hi, const LinearGaussianModel& model,
                     const MLEOptions& options = {});

}  // namespace pfbo

#endif  // PFBO_KALMAN_HPP
