#ifndef PFBO_UNIVARIATE_HPP
#define PFBO_UNIVARIATE_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace pfbo {

/// Result of a one-dimensional maximization. `f_star == f(x_star)`.
template <typename Scalar = double>
struct OptResult {
  Scalar x_star{};
  Scalar f_star{};
  std::size_t evaluations = 0;

  friend bool operator==(const OptResult&, const OptResult&) = default;
};

/// Evaluates f at n equally spaced points on [lo, hi] (both ends included)
/// and returns the best one. Ties go to the smallest x.
template <typename Scalar, typename F>
OptResult<Scalar> grid_max(F&& f, Scalar lo, Scalar hi, std::size_t n) {
  if (!(lo < hi)) throw std::invalid_argument("grid_max: require lo < hi");
  if (n < 2) throw std::invalid_argument("grid_max: require n >= 2");
  OptResult<Scalar> best{lo, -std::numeric_limits<Scalar>::infinity(), 0};
  const Scalar step = (hi - lo) / static_cast<Scalar>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const Scalar x = i + 1 == n ? hi : lo + static_cast<Scalar>(i) * step;
    const Scalar fx = f(x);
    ++best.evaluations;
    if (!std::isfinite(fx)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "grid_max: non-finite objective value at x = " << x;
      throw std::domain_error(msg.str());
    }
    if (fx > best.f_star) {
      best.x_star = x;
      best.f_star = fx;
    }
  }
  return best;
}

/// Brent's parabolic-interpolation / golden-section search for a maximum
/// inside the bracket a < b < c with f(b) >= max(f(a), f(c)). Stops when the
/// bracket around the current best point is narrower than about 2*tol.
template <typename Scalar, typename F>
OptResult<Scalar> brent_max(F&& f, Scalar a, Scalar b, Scalar c, Scalar tol) {
  if (!(a < b && b < c)) throw std::invalid_argument("brent_max: require a < b < c");
  if (!(tol > 0)) throw std::invalid_argument("brent_max: require tol > 0");
  const Scalar fa = f(a);
  const Scalar fb = f(b);
  const Scalar fc = f(c);
  std::size_t evals = 3;
  if (!(fb >= fa && fb >= fc)) throw std::invalid_argument("brent_max: f(b) must dominate f(a) and f(c)");

  // Minimize g = -f. Variable names follow Brent's localmin.
  const Scalar golden = static_cast<Scalar>(0.3819660112501051);
  const Scalar eps = std::sqrt(std::numeric_limits<Scalar>::epsilon());
  Scalar lo = a, hi = c;
  Scalar x = b, w = b, v = b;
  Scalar gx = -fb, gw = gx, gv = gx;
  Scalar d = 0, e = 0;

  for (int iter = 0; iter < 500; ++iter) {
    const Scalar mid = (lo + hi) / 2;
    const Scalar tol1 = eps * std::abs(x) + tol / 3;
    const Scalar tol2 = 2 * tol1;
    if (std::abs(x - mid) <= tol2 - (hi - lo) / 2) break;

    bool golden_step = true;
    if (std::abs(e) > tol1) {
      Scalar r = (x - w) * (gx - gv);
      Scalar q = (x - v) * (gx - gw);
      Scalar p = (x - v) * q - (x - w) * r;
      q = 2 * (q - r);
      if (q > 0) p = -p;
      q = std::abs(q);
      const Scalar e_prev = e;
      if (std::abs(p) < std::abs(q * e_prev / 2) && p > q * (lo - x) && p < q * (hi - x)) {
        e = d;
        d = p / q;
        const Scalar u = x + d;
        if (u - lo < tol2 || hi - u < tol2) d = mid >= x ? tol1 : -tol1;
        golden_step = false;
      }
    }
    if (golden_step) {
      e = (x >= mid ? lo : hi) - x;
      d = golden * e;
    }
    const Scalar u = std::abs(d) >= tol1 ? x + d : x + (d > 0 ? tol1 : -tol1);
    const Scalar gu = -f(u);
    ++evals;
    if (gu <= gx) {
      (u >= x ? lo : hi) = x;
      v = w, gv = gw;
      w = x, gw = gx;
      x = u, gx = gu;
    } else {
      (u < x ? lo : hi) = u;
      if (gu <= gw || w == x) {
        v = w, gv = gw;
        w = u, gw = gu;
      } else if (gu <= gv || v == x || v == w) {
        v = u, gv = gu;
      }
    }
  }
  return {x, -gx, evals};
}

/// Grid scan followed by Brent refinement on the bracket formed by the grid
/// winner and its two neighbours. A winner at either end is returned as is.
/// The result is never worse than the best grid value.
template <typename Scalar, typename F>
OptResult<Scalar> grid_then_brent(F&& f, Scalar lo, Scalar hi, std::size_t n, Scalar tol) {
  OptResult<Scalar> grid = grid_max<Scalar>(f, lo, hi, n);
  const Scalar step = (hi - lo) / static_cast<Scalar>(n - 1);
  if (grid.x_star == lo || grid.x_star == hi) return grid;
  const Scalar a = std::max(lo, grid.x_star - step);
  const Scalar c = std::min(hi, grid.x_star + step);
  OptResult<Scalar> refined = brent_max<Scalar>(f, a, grid.x_star, c, tol);
  refined.evaluations += grid.evaluations;
  if (!(refined.f_star >= grid.f_star)) {
    grid.evaluations = refined.evaluations;
    return grid;
  }
  return refined;
}

}  // namespace pfbo

#endif  // PFBO_UNIVARIATE_HPP
