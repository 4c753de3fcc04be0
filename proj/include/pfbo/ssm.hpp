#ifndef PFBO_SSM_HPP
#define PFBO_SSM_HPP

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "pfbo/rng.hpp"

namespace pfbo {

/// Ordered scalar observations y_1..y_T. Always non-empty and finite.
class TimeSeries {
 public:
  explicit TimeSeries(std::vector<double> values);

  std::size_t length() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t t) const noexcept { return values_[t]; }
  Eigen::Map<const Eigen::VectorXd> as_vector() const noexcept {
    return {values_.data(), static_cast<Eigen::Index>(values_.size())};
  }

  friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

 private:
  std::vector<double> values_;
};

/// Scalar-state model x_t ~ f(x_{t-1}, v), y_t ~ h(x_t) + w.
///
/// The batch overloads act on a whole particle population and default to
/// looping over the scalar ones; models override them when a vectorized form
/// exists. All sampling is a deterministic function of the Rng state.
class StateSpaceModel {
 public:
  virtual ~StateSpaceModel() = default;

  virtual double sample_initial(Rng& rng) const = 0;
  virtual double sample_transition(double state, Rng& rng) const = 0;
  virtual double observation_log_density(double state, double observation) const = 0;

  virtual void sample_initial(Eigen::Ref<Eigen::ArrayXd> states, Rng& rng) const;
  virtual void sample_transition(Eigen::Ref<Eigen::ArrayXd> states, Rng& rng) const;
  virtual void observation_log_density(const Eigen::Ref<const Eigen::ArrayXd>& states, double observation,
                                       Eigen::Ref<Eigen::ArrayXd> out) const;
};

/// Random walk plus noise:
///   x_t = x_{t-1} + v_t,  v_t ~ N(0, tau2)
///   y_t = x_t + w_t,      w_t ~ N(0, obs_var)
///   x_0 ~ N(init_mean, init_var)
class LinearGaussianModel final : public StateSpaceModel {
 public:
  static constexpr double kDefaultObsVar = 1.043;
  static constexpr double kDefaultInitMean = 0.0;
  static constexpr double kDefaultInitVar = 4.0;

  explicit LinearGaussianModel(double tau2 = 0.0, double obs_var = kDefaultObsVar,
                               double init_mean = kDefaultInitMean, double init_var = kDefaultInitVar);

  double tau2() const noexcept { return tau2_; }
  double obs_var() const noexcept { return obs_var_; }
  double init_mean() const noexcept { return init_mean_; }
  double init_var() const noexcept { return init_var_; }

  /// Same observation and prior settings with a different system noise variance.
  LinearGaussianModel with_tau2(double tau2) const { return LinearGaussianModel(tau2, obs_var_, init_mean_, init_var_); }

  double sample_initial(Rng& rng) const override;
  double sample_transition(double state, Rng& rng) const override;
  double observation_log_density(double state, double observation) const override;

  void sample_initial(Eigen::Ref<Eigen::ArrayXd> states, Rng& rng) const override;
  void sample_transition(Eigen::Ref<Eigen::ArrayXd> states, Rng& rng) const override;
  void observation_log_density(const Eigen::Ref<const Eigen::ArrayXd>& states, double observation,
                               Eigen::Ref<Eigen::ArrayXd> out) const override;

 private:
  double tau2_;
  double obs_var_;
  double init_mean_;
  double init_var_;
  double obs_log_norm_;
};

/// Draws y_1..y_T from the model. The stream is keyed by (seed, simulate).
TimeSeries simulate(const LinearGaussianModel& model, std::size_t length, std::uint64_t seed);

/// Reads a single-column CSV of decimals (optional header `y`, LF or CRLF).
TimeSeries load_series(const std::filesystem::path& path);

/// Parses the same format from an in-memory string; `origin` names the
/// source in error messages.
TimeSeries parse_series(std::string_view text, std::string_view origin = "<input>");

}  // namespace pfbo

#endif  // PFBO_SSM_HPP
