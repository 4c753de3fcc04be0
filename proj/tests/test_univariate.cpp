#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pfbo/univariate.hpp"

using pfbo::brent_max;
using pfbo::grid_max;
using pfbo::grid_then_brent;

namespace {

struct DenseArgMax {
  double x, f, spacing;
};

template <typename F>
DenseArgMax dense_grid(F f, double lo, double hi, std::size_t n = 1000001) {
  DenseArgMax best{lo, -INFINITY, (hi - lo) / static_cast<double>(n - 1)};
  for (std::size_t i = 0; i < n; ++i) {
    const double x = lo + best.spacing * static_cast<double>(i);
    const double v = f(x);
    if (v > best.f) best.x = x, best.f = v;
  }
  return best;
}

}  // namespace

TEST_CASE("grid_max examples") {
  auto quad = [](double x) { return -(x - 0.5) * (x - 0.5); };
  const auto r = grid_max<double>(quad, 0.0, 1.0, 101);
  CHECK(r.x_star == 0.5);
  CHECK(r.evaluations == 101);
  CHECK(r.f_star == quad(r.x_star));

  CHECK(grid_max<double>([](double) { return 3.0; }, 2.0, 4.0, 11).x_star == 2.0);

  const auto s = grid_max<double>([](double x) { return std::sin(10 * x); }, 0.0, 1.0, 1001);
  CHECK(std::abs(s.x_star - std::numbers::pi / 20) < 1e-3);

  CHECK(grid_max<double>([](double x) { return x; }, 0.0, 1.0, 7).x_star == 1.0);
}

TEST_CASE("grid_max errors") {
  CHECK_THROWS_AS(grid_max<double>([](double) { return 0.0; }, 1.0, 1.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(grid_max<double>([](double) { return 0.0; }, 0.0, 1.0, 1), std::invalid_argument);
  try {
    grid_max<double>([](double x) { return x > 0.45 ? NAN : x; }, 0.0, 1.0, 11);
    FAIL("expected an error");
  } catch (const std::domain_error& e) {
    CHECK(std::string(e.what()).find("0.5") != std::string::npos);
  }
}

TEST_CASE("brent_max examples") {
  const auto q = brent_max<double>([](double x) { return -(x - 0.3) * (x - 0.3); }, 0.0, 0.25, 1.0, 1e-8);
  CHECK(std::abs(q.x_star - 0.3) < 1e-7);

  const auto k = brent_max<double>([](double x) { return -std::abs(x - 0.4); }, 0.0, 0.5, 1.0, 1e-6);
  CHECK(std::abs(k.x_star - 0.4) < 1e-5);
  CHECK(k.x_star >= 0.0);
  CHECK(k.x_star <= 1.0);

  CHECK_THROWS_AS(brent_max<double>([](double x) { return x; }, 0.0, 0.5, 1.0, 1e-6), std::invalid_argument);
  CHECK_THROWS_AS(brent_max<double>([](double x) { return -x * x; }, 0.0, -0.1, 1.0, 1e-6), std::invalid_argument);
  CHECK_THROWS_AS(brent_max<double>([](double x) { return -x * x; }, -1.0, 0.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("grid_then_brent matches a dense grid on unimodal functions") {
  auto f = [](double x) { return -std::cosh(3.0 * (x - 0.3719)) + 0.2 * x; };
  const double tol = 1e-6;
  const auto r = grid_then_brent<double>(f, 0.0, 1.0, 201, tol);
  const DenseArgMax d = dense_grid(f, 0.0, 1.0);
  CHECK(std::abs(r.x_star - d.x) <= std::max(tol, d.spacing) + 1e-12);
  CHECK(r.f_star >= d.f - 1e-12);
  CHECK(r.f_star == f(r.x_star));
}

TEST_CASE("grid_then_brent boundary winner skips refinement") {
  int calls = 0;
  auto f = [&](double x) {
    ++calls;
    return -x;
  };
  const auto r = grid_then_brent<double>(f, 0.0, 1.0, 11, 1e-6);
  CHECK(r.x_star == 0.0);
  CHECK(calls == 11);
  CHECK(r.evaluations == 11);
}

TEST_CASE("grid_then_brent on a multimodal function") {
  auto f = [](double x) { return std::sin(25 * x); };
  const auto r = grid_then_brent<double>(f, 0.0, 1.0, 501, 1e-6);
  const DenseArgMax d = dense_grid(f, 0.0, 1.0);
  CHECK(r.f_star >= d.f - 1e-6);
}

TEST_CASE("grid_then_brent never loses to the grid and is deterministic") {
  for (int k = 1; k <= 20; ++k) {
    auto f = [k](double x) { return std::sin(7.3 * k * x) + 0.3 * std::cos(31.0 * x + k); };
    const auto g = grid_max<double>(f, -1.0, 2.0, 41);
    const auto r = grid_then_brent<double>(f, -1.0, 2.0, 41, 1e-7);
    CHECK(r.f_star >= g.f_star);
    CHECK(r.x_star >= -1.0);
    CHECK(r.x_star <= 2.0);
    CHECK(r == grid_then_brent<double>(f, -1.0, 2.0, 41, 1e-7));
  }
}

TEST_CASE("long double instantiation") {
  const auto r = grid_then_brent<long double>([](long double x) { return -(x - 0.123L) * (x - 0.123L); }, 0.0L, 1.0L,
                                              101, 1e-10L);
  CHECK(std::abs(static_cast<double>(r.x_star) - 0.123) < 1e-8);
}
