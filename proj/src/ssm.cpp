#include "pfbo/ssm.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

namespace pfbo {

namespace {

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

TimeSeries::TimeSeries(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw std::invalid_argument("empty series");
  if (!all_finite(values_)) throw std::invalid_argument("series contains non-finite values");
}

void StateSpaceModel::sample_initial(Eigen::Ref<Eigen::ArrayXd> states, Rng& rng) const {
  for (Eigen::Index i = 0; i < states.size(); ++i) states[i] = sample_initial(rng);
}

void StateSpaceModel::sample_transition(Eigen::Ref<Eigen::ArrayXd> states, Rng& rng) const {
  for (Eigen::Index i = 0; i < states.size(); ++i) states[i] = sample_transition(states[i], rng);
}

void StateSpaceModel::observation_log_density(const Eigen::Ref<const Eigen::ArrayXd>& states, double observation,
                                              Eigen::Ref<Eigen::ArrayXd> out) const {
  for (Eigen::Index i = 0; i < states.size(); ++i) out[i] = observation_log_density(states[i], observation);
}

LinearGaussianModel::LinearGaussianModel(double tau2, double obs_var, double init_mean, double init_var)
    : tau2_(tau2), obs_var_(obs_var), init_mean_(init_mean), init_var_(init_var) {
  if (!std::isfinite(tau2) || !std::isfinite(obs_var) || !std::isfinite(init_mean) || !std::isfinite(init_var))
    throw std::invalid_argument("model parameters must be finite");
  if (tau2 < 0.0) throw std::invalid_argument("tau2 must be >= 0");
  if (!(obs_var > 0.0)) throw std::invalid_argument("obs_var must be > 0");
  if (!(init_var > 0.0)) throw std::invalid_argument("init_var must be > 0");
  obs_log_norm_ = -0.5 * std::log(2.0 * std::numbers::pi * obs_var_);
}

double LinearGaussianModel::sample_initial(Rng& rng) const { return rng.normal(init_mean_, std::sqrt(init_var_)); }

double LinearGaussianModel::sample_transition(double state, Rng& rng) const {
  return state + std::sqrt(tau2_) * rng.normal();
}

double LinearGaussianModel::observation_log_density(double state, double observation) const {
  const double r = observation - state;
  return obs_log_norm_ - 0.5 * r * r / obs_var_;
}

void LinearGaussianModel::sample_initial(Eigen::Ref<Eigen::ArrayXd> states, Rng& rng) const {
  rng.fill_normal(states);
  states = init_mean_ + std::sqrt(init_var_) * states;
}

void LinearGaussianModel::sample_transition(Eigen::Ref<Eigen::ArrayXd> states, Rng& rng) const {
  const double sd = std::sqrt(tau2_);
  for (Eigen::Index i = 0; i < states.size(); ++i) states[i] += sd * rng.normal();
}

void LinearGaussianModel::observation_log_density(const Eigen::Ref<const Eigen::ArrayXd>& states, double observation,
                                                  Eigen::Ref<Eigen::ArrayXd> out) const {
  out = obs_log_norm_ - (0.5 / obs_var_) * (observation - states).square();
}

TimeSeries simulate(const LinearGaussianModel& model, std::size_t length, std::uint64_t seed) {
  if (length == 0) throw std::invalid_argument("series length must be >= 1");
  Rng rng(derive_seed(seed, StreamPurpose::simulate));
  std::vector<double> y(length);
  double x = model.sample_initial(rng);
  for (std::size_t t = 0; t < length; ++t) {
    x = model.sample_transition(x, rng);
    y[t] = x + std::sqrt(model.obs_var()) * rng.normal();
  }
  return TimeSeries(std::move(y));
}

TimeSeries parse_series(std::string_view text, std::string_view origin) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<double> values;
  std::size_t line_no = 0;
  bool first_content = true;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (first_content) {
      first_content = false;
      if (line == "y") continue;
    }
    double v = 0.0;
    const char* end = line.data() + line.size();
    auto [ptr, ec] = std::from_chars(line.data(), end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
      std::ostringstream msg;
      msg << origin << ": line " << line_no << ": not a finite number: '" << line << "'";
      throw std::invalid_argument(msg.str());
    }
    values.push_back(v);
  }
  if (values.empty()) throw std::invalid_argument(std::string(origin) + ": empty series");
  return TimeSeries(std::move(values));
}

TimeSeries load_series(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open series file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_series(buf.str(), path.string());
}

}  // namespace pfbo
