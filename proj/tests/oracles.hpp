// Reference computations used only by tests. They deliberately avoid the
// library's code paths: explicit matrix inverses instead of Cholesky solves,
// dense T x T covariances instead of the Kalman recursion, brute-force grids
// instead of Brent.
#ifndef PFBO_TESTS_ORACLES_HPP
#define PFBO_TESTS_ORACLES_HPP

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "pfbo/ssm.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<long double>>;

/// Gauss-Jordan inverse with partial pivoting, in long double.
inline Matrix invert(Matrix a) {
  const std::size_t n = a.size();
  Matrix inv(n, std::vector<long double>(n, 0.0L));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0L;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    if (a[piv][col] == 0.0L) throw std::runtime_error("singular matrix");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    const long double d = a[col][col];
    for (std::size_t k = 0; k < n; ++k) {
      a[col][k] /= d;
      inv[col][k] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const long double f = a[r][col];
      if (f == 0.0L) continue;
      for (std::size_t k = 0; k < n; ++k) {
        a[r][k] -= f * a[col][k];
        inv[r][k] -= f * inv[col][k];
      }
    }
  }
  return inv;
}

/// GP posterior mean and variance by explicit inverse of K + sigma_n^2 I.
struct DenseGP {
  std::vector<double> x, y;
  double sigma_f, length_scale, sigma_n;
  Matrix kinv;

  DenseGP(std::vector<double> xs, std::vector<double> ys, double sf, double ls, double sn)
      : x(std::move(xs)), y(std::move(ys)), sigma_f(sf), length_scale(ls), sigma_n(sn) {
    const std::size_t n = x.size();
    Matrix k(n, std::vector<long double>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) k[i][j] = kernel(x[i], x[j]) + (i == j ? (long double)sn * sn : 0.0L);
    kinv = invert(k);
  }

  long double kernel(double a, double b) const {
    const long double r = ((long double)a - b) / length_scale;
    return (long double)sigma_f * sigma_f * std::exp(-r * r / 2);
  }

  std::pair<double, double> predict(double q) const {
    const std::size_t n = x.size();
    std::vector<long double> kq(n);
    for (std::size_t i = 0; i < n; ++i) kq[i] = kernel(x[i], q);
    long double mean = 0, quad = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        mean += kq[i] * kinv[i][j] * y[j];
        quad += kq[i] * kinv[i][j] * kq[j];
      }
    return {(double)mean, (double)(kernel(q, q) - quad)};
  }
};

/// log N(y; init_mean 1, Sigma) with Sigma_ij = init_var + theta min(i, j) + obs_var [i == j],
/// evaluated via an explicit long-double Cholesky on the dense T x T matrix.
inline double dense_gaussian_loglik(double theta, const std::vector<double>& y, double obs_var, double init_mean,
                                    double init_var) {
  const std::size_t n = y.size();
  Matrix c(n, std::vector<long double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      c[i][j] = (long double)init_var + (long double)theta * (long double)(std::min(i, j) + 1) +
                (i == j ? (long double)obs_var : 0.0L);
  // In-place Cholesky, lower triangle.
  for (std::size_t j = 0; j < n; ++j) {
    long double s = c[j][j];
    for (std::size_t k = 0; k < j; ++k) s -= c[j][k] * c[j][k];
    c[j][j] = std::sqrt(s);
    for (std::size_t i = j + 1; i < n; ++i) {
      long double t = c[i][j];
      for (std::size_t k = 0; k < j; ++k) t -= c[i][k] * c[j][k];
      c[i][j] = t / c[j][j];
    }
  }
  std::vector<long double> z(n);
  long double logdet = 0;
  for (std::size_t i = 0; i < n; ++i) {
    long double t = (long double)y[i] - init_mean;
    for (std::size_t k = 0; k < i; ++k) t -= c[i][k] * z[k];
    z[i] = t / c[i][i];
    logdet += 2 * std::log(c[i][i]);
  }
  long double quad = 0;
  for (long double v : z) quad += v * v;
  return (double)(-0.5L * ((long double)n * std::log(2 * std::numbers::pi_v<long double>) + logdet + quad));
}

/// Per-test scratch directory under the build tree (or the system temp dir).
inline std::filesystem::path scratch_dir(const std::string& name) {
  const char* base = std::getenv("PFBO_TEST_TMP");
  std::filesystem::path dir = base ? std::filesystem::path(base) : std::filesystem::temp_directory_path() / "pfbo_tests";
  dir /= name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oracle

#endif  // PFBO_TESTS_ORACLES_HPP
