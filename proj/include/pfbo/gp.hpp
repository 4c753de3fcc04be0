#ifndef PFBO_GP_HPP
#define PFBO_GP_HPP

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace pfbo {

/// Squared-exponential kernel settings. sigma_n may be zero; the fit always
/// adds a small relative jitter to the diagonal.
template <typename Scalar = double>
struct GPHyperParams {
  Scalar sigma_f = 1;
  Scalar length_scale = Scalar(0.2);
  Scalar sigma_n = Scalar(0.3);

  void validate() const {
    if (!(sigma_f > 0) || !(length_scale > 0) || !(sigma_n >= 0) || !std::isfinite(sigma_f) ||
        !std::isfinite(length_scale) || !std::isfinite(sigma_n))
      throw std::invalid_argument("GP hyperparameters must be finite with sigma_f > 0, length_scale > 0, sigma_n >= 0");
  }
};

/// sigma_f^2 * exp(-(x - x')^2 / (2 l^2))
template <typename Scalar>
Scalar se_kernel(Scalar x, Scalar x_prime, const GPHyperParams<Scalar>& hp) {
  const Scalar r = (x - x_prime) / hp.length_scale;
  return hp.sigma_f * hp.sigma_f * std::exp(-r * r / 2);
}

/// Training inputs on the unit interval and their (standardized) targets.
template <typename Scalar = double>
struct GPDataset {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector inputs;
  Vector targets;

  GPDataset() = default;
  GPDataset(Vector x, Vector y) : inputs(std::move(x)), targets(std::move(y)) { validate(); }

  Eigen::Index size() const noexcept { return inputs.size(); }

  void push_back(Scalar x, Scalar y) {
    if (!(x >= 0 && x <= 1)) throw std::invalid_argument("GP input outside [0, 1]");
    const Eigen::Index n = inputs.size();
    inputs.conservativeResize(n + 1);
    targets.conservativeResize(n + 1);
    inputs[n] = x;
    targets[n] = y;
  }

  void validate() const {
    if (inputs.size() != targets.size()) throw std::invalid_argument("GP dataset: inputs and targets differ in length");
    for (Eigen::Index i = 0; i < inputs.size(); ++i)
      if (!(inputs[i] >= 0 && inputs[i] <= 1)) throw std::invalid_argument("GP input outside [0, 1]");
    if (!targets.allFinite()) throw std::invalid_argument("GP targets must be finite");
  }
};

template <typename Scalar = double>
struct GPPrediction {
  Scalar mean{};
  Scalar variance{};
};

/// Posterior of a zero-mean GP given noisy observations.
///
/// Holds the Cholesky factor L of K + (sigma_n^2 + jitter) I and
/// alpha = (K + ...)^-1 y, so the mean costs O(t) and the variance O(t^2)
/// per query.
template <typename Scalar = double>
class GPPosterior {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  static constexpr Scalar kInitialJitter = Scalar(1e-10);
  static constexpr Scalar kMaxJitter = Scalar(1e-6);

  GPPosterior(GPDataset<Scalar> data, const GPHyperParams<Scalar>& hp) : data_(std::move(data)), hp_(hp) {
    hp_.validate();
    data_.validate();
    factorize();
  }

  const GPDataset<Scalar>& dataset() const noexcept { return data_; }
  const GPHyperParams<Scalar>& hyperparams() const noexcept { return hp_; }
  /// Relative diagonal jitter (times sigma_f^2) that made the factorization succeed.
  Scalar jitter() const noexcept { return jitter_; }

  Vector kernel_vector(Scalar x) const {
    Vector k(data_.size());
    for (Eigen::Index i = 0; i < k.size(); ++i) k[i] = se_kernel(data_.inputs[i], x, hp_);
    return k;
  }

  Scalar mean(Scalar x) const {
    if (data_.size() == 0) return 0;
    return kernel_vector(x).dot(alpha_);
  }

  GPPrediction<Scalar> predict(Scalar x) const {
    const Scalar prior = hp_.sigma_f * hp_.sigma_f;
    if (data_.size() == 0) return {0, prior};
    const Vector k = kernel_vector(x);
    const Vector v = llt_.matrixL().solve(k);
    const Scalar var = prior - v.squaredNorm();
    return {k.dot(alpha_), var > 0 ? var : Scalar(0)};
  }

 private:
  void factorize() {
    const Eigen::Index n = data_.size();
    if (n == 0) return;
    Matrix gram(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j <= i; ++j) gram(i, j) = gram(j, i) = se_kernel(data_.inputs[i], data_.inputs[j], hp_);
    const Scalar signal = hp_.sigma_f * hp_.sigma_f;
    const Scalar noise = hp_.sigma_n * hp_.sigma_n;
    for (jitter_ = kInitialJitter; jitter_ <= kMaxJitter * Scalar(1.0000001); jitter_ *= 10) {
      Matrix system = gram;
      system.diagonal().array() += noise + jitter_ * signal;
      llt_.compute(system);
      if (llt_.info() == Eigen::Success) {
        alpha_ = llt_.solve(data_.targets);
        if (alpha_.allFinite()) return;
      }
    }
    throw std::runtime_error("GP fit: kernel matrix not positive definite after jitter escalation "
                             "(duplicated inputs with sigma_n = 0?)");
  }

  GPDataset<Scalar> data_;
  GPHyperParams<Scalar> hp_;
  Eigen::LLT<Matrix> llt_;
  Vector alpha_;
  Scalar jitter_ = 0;
};

/// Factorizes the kernel system for `data`; an empty dataset yields the prior.
template <typename Scalar>
GPPosterior<Scalar> fit(GPDataset<Scalar> data, const GPHyperParams<Scalar>& hp) {
  return GPPosterior<Scalar>(std::move(data), hp);
}

template <typename Scalar>
GPPrediction<Scalar> predict(const GPPosterior<Scalar>& post, Scalar x) {
  return post.predict(x);
}

}  // namespace pfbo

#endif  // PFBO_GP_HPP
