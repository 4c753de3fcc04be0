#include "pfbo/kalman.hpp"

#include "pfbo/univariate.hpp"

namespace pfbo {

MLEResult kalman_mle(const TimeSeries& series, double lo, double hi, const LinearGaussianModel& model,
                     const MLEOptions& options) {
  if (!(lo >= 0.0 && lo < hi && std::isfinite(hi))) throw std::invalid_argument("kalman_mle: require 0 <= lo < hi");
  if (!(options.tol > 0.0)) throw std::invalid_argument("kalman_mle: require tol > 0");
  auto objective = [&](double theta) { return kalman_loglik(theta, series, model); };
  const OptResult<double> best = grid_then_brent(objective, lo, hi, options.grid_points, options.tol);
  return {best.x_star, best.f_star};
}

}  // namespace pfbo
