#include <doctest.h>

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "oracles.hpp"
#include "pfbo/ssm.hpp"

using pfbo::LinearGaussianModel;
using pfbo::TimeSeries;

TEST_CASE("model parameters are validated") {
  CHECK_THROWS_AS(LinearGaussianModel(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(LinearGaussianModel(0.01, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(LinearGaussianModel(0.01, 1.0, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(LinearGaussianModel(0.01, 1.0, NAN, 1.0), std::invalid_argument);
  const LinearGaussianModel m;
  CHECK(m.obs_var() == 1.043);
  CHECK(m.init_var() == 4.0);
  CHECK(m.with_tau2(0.5).tau2() == 0.5);
  CHECK(m.with_tau2(0.5).obs_var() == 1.043);
}

TEST_CASE("observation density is the Gaussian log density") {
  const LinearGaussianModel m(0.01, 2.0);
  const double expected = -0.5 * std::log(2 * M_PI * 2.0) - 0.25 * 1.5 * 1.5;
  CHECK(m.observation_log_density(0.5, 2.0) == doctest::Approx(expected).epsilon(1e-14));
  Eigen::ArrayXd states(3), out(3);
  states << 0.5, -1.0, 10.0;
  m.observation_log_density(states, 2.0, out);
  for (int i = 0; i < 3; ++i) CHECK(out[i] == doctest::Approx(m.observation_log_density(states[i], 2.0)).epsilon(1e-14));
  CHECK(std::isfinite(m.observation_log_density(1e150, -1e150)));
}

TEST_CASE("noise-free degenerate limit") {
  const LinearGaussianModel m(0.0, 1e-300, 0.0, 1e-300);
  const TimeSeries s = pfbo::simulate(m, 3, 99);
  for (double v : s.values()) CHECK(std::abs(v) < 1e-140);
}

TEST_CASE("simulation is reproducible and seed dependent") {
  const LinearGaussianModel m(0.012);
  CHECK(pfbo::simulate(m, 500, 1) == pfbo::simulate(m, 500, 1));
  CHECK_FALSE(pfbo::simulate(m, 500, 1) == pfbo::simulate(m, 500, 2));
  CHECK(pfbo::simulate(m, 500, 1).length() == 500);
  CHECK_THROWS_AS(pfbo::simulate(m, 0, 1), std::invalid_argument);
}

TEST_CASE("first differences have variance tau2 + 2 obs_var") {
  const LinearGaussianModel m(0.012);
  const TimeSeries s = pfbo::simulate(m, 10000, 7);
  double sum = 0, sq = 0;
  const std::size_t n = s.length() - 1;
  for (std::size_t t = 1; t < s.length(); ++t) sum += s[t] - s[t - 1];
  const double mean = sum / n;
  for (std::size_t t = 1; t < s.length(); ++t) sq += (s[t] - s[t - 1] - mean) * (s[t] - s[t - 1] - mean);
  CHECK(sq / (n - 1) == doctest::Approx(0.012 + 2 * 1.043).epsilon(0.05));
}

TEST_CASE("TimeSeries rejects bad content") {
  CHECK_THROWS_AS(TimeSeries({}), std::invalid_argument);
  CHECK_THROWS_AS(TimeSeries({1.0, NAN}), std::invalid_argument);
  CHECK_THROWS_AS(TimeSeries({INFINITY}), std::invalid_argument);
}

TEST_CASE("parse_series formats") {
  CHECK(pfbo::parse_series("0.1\n-0.2\n") == TimeSeries({0.1, -0.2}));
  CHECK(pfbo::parse_series("y\n1\n2") == TimeSeries({1.0, 2.0}));
  CHECK(pfbo::parse_series("y\r\n1.5\r\n\r\n-3e-2\r\n") == TimeSeries({1.5, -0.03}));
  CHECK(pfbo::parse_series("\xEF\xBB\xBFy\n4\n") == TimeSeries({4.0}));
  try {
    pfbo::parse_series("0.1\nabc\n", "data.csv");
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    CHECK(std::string(e.what()).find("data.csv") != std::string::npos);
  }
  try {
    pfbo::parse_series("");
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("empty series") != std::string::npos);
  }
  CHECK_THROWS(pfbo::parse_series("y\n"));
  CHECK_THROWS(pfbo::parse_series("1\nnan\n"));
}

TEST_CASE("load_series reads files") {
  const auto dir = oracle::scratch_dir("ssm_load");
  {
    std::ofstream(dir / "a.csv") << "0.1\n-0.2\n";
    std::ofstream(dir / "empty.csv");
  }
  CHECK(pfbo::load_series(dir / "a.csv") == TimeSeries({0.1, -0.2}));
  CHECK_THROWS(pfbo::load_series(dir / "empty.csv"));
  CHECK_THROWS(pfbo::load_series(dir / "missing.csv"));
}
