#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pfbo/kalman.hpp"
#include "pfbo/pfilter.hpp"

using pfbo::LinearGaussianModel;
using pfbo::PFConfig;
using pfbo::TimeSeries;

namespace {

Eigen::ArrayXd weights(std::initializer_list<double> w) {
  Eigen::ArrayXd a(static_cast<Eigen::Index>(w.size()));
  Eigen::Index i = 0;
  for (double v : w) a[i++] = v;
  return a;
}

std::vector<int> counts(const std::vector<Eigen::Index>& idx, std::size_t m) {
  std::vector<int> c(m, 0);
  for (auto i : idx) ++c[static_cast<std::size_t>(i)];
  return c;
}

/// Random walk whose observation density is -inf everywhere after `bad_step`
/// observations.
class BrokenModel final : public pfbo::StateSpaceModel {
 public:
  double sample_initial(pfbo::Rng& rng) const override { return rng.normal(); }
  double sample_transition(double x, pfbo::Rng& rng) const override { return x + rng.normal(); }
  double observation_log_density(double, double y) const override {
    return y > 100.0 ? -std::numeric_limits<double>::infinity() : -0.5 * y * y;
  }
};

}  // namespace

TEST_CASE("ess examples") {
  CHECK(pfbo::ess(Eigen::ArrayXd::Constant(100, 0.01)) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(pfbo::ess(weights({1, 0, 0, 0})) == 1.0);
  CHECK(pfbo::ess(weights({0.5, 0.5, 0, 0})) == 2.0);
  CHECK_THROWS_AS(pfbo::ess(Eigen::ArrayXd()), std::invalid_argument);
  CHECK_THROWS_AS(pfbo::ess(weights({0.5, 0.6})), std::invalid_argument);
  CHECK_THROWS_AS(pfbo::ess(weights({1.5, -0.5})), std::invalid_argument);
}

TEST_CASE("systematic resampling examples") {
  CHECK(counts(pfbo::systematic_resample(Eigen::ArrayXd::Constant(4, 0.25), 0.5), 4) == std::vector<int>{1, 1, 1, 1});
  for (double u : {0.0, 0.3, 0.999999})
    CHECK(pfbo::systematic_resample(weights({1, 0, 0}), u) == std::vector<Eigen::Index>{0, 0, 0});
  CHECK_THROWS_AS(pfbo::systematic_resample(weights({0.5, 0.5}), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(pfbo::systematic_resample(weights({0.5, 0.5}), -0.1), std::invalid_argument);
}

TEST_CASE("systematic resampling agrees with stratified position enumeration") {
  const Eigen::ArrayXd w = weights({0.5, 0.3, 0.2});
  const double u = 0.1;
  // Positions (u + j) / m = 0.0333, 0.3667, 0.7 against partition [0, .5), [.5, .8), [.8, 1).
  const double edges[] = {0.0, 0.5, 0.8, 1.0};
  std::vector<int> expected(3, 0);
  for (int j = 0; j < 3; ++j) {
    const double pos = (u + j) / 3.0;
    for (int k = 0; k < 3; ++k)
      if (pos >= edges[k] && pos < edges[k + 1]) ++expected[k];
  }
  CHECK(expected == std::vector<int>{2, 1, 0});
  CHECK(counts(pfbo::systematic_resample(w, u), 3) == expected);
}

TEST_CASE("systematic resampling count guarantee on random weights") {
  pfbo::Rng rng(77);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t m = 1 + rng.bits() % 50;
    Eigen::ArrayXd w(static_cast<Eigen::Index>(m));
    for (auto& v : w) v = rng.uniform() < 0.2 ? 0.0 : -std::log(rng.uniform_open0());
    if (w.sum() == 0.0) w[0] = 1.0;
    w /= w.sum();
    const auto idx = pfbo::systematic_resample(w, rng.uniform());
    REQUIRE(idx.size() == m);
    CHECK(std::is_sorted(idx.begin(), idx.end()));
    const auto c = counts(idx, m);
    for (std::size_t i = 0; i < m; ++i) {
      const double target = static_cast<double>(m) * w[static_cast<Eigen::Index>(i)];
      // Allow for the cumulative-sum rounding at exact integer boundaries.
      CHECK(c[i] >= std::floor(target - 1e-9));
      CHECK(c[i] <= std::ceil(target + 1e-9));
      if (w[static_cast<Eigen::Index>(i)] == 0.0) CHECK(c[i] == 0);
    }
  }
}

TEST_CASE("config validation") {
  const TimeSeries s({0.0});
  CHECK_THROWS_AS(pfbo::pf_loglik(0.01, s, LinearGaussianModel(), PFConfig{0, 0.5, 1}), std::invalid_argument);
  CHECK_THROWS_AS(pfbo::pf_loglik(0.01, s, LinearGaussianModel(), PFConfig{10, 0.0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(pfbo::pf_loglik(0.01, s, LinearGaussianModel(), PFConfig{10, 1.5, 1}), std::invalid_argument);
  CHECK_THROWS_AS(pfbo::pf_loglik(-0.01, s, LinearGaussianModel(), PFConfig{}), std::invalid_argument);
  CHECK_NOTHROW(pfbo::pf_loglik(0.01, s, LinearGaussianModel(), PFConfig{1, 1.0, 1}));
}

TEST_CASE("flat likelihood matches Kalman even with few particles") {
  const LinearGaussianModel wide(0.0, 1e6);
  const TimeSeries s = pfbo::simulate(LinearGaussianModel(0.012), 200, 3);
  for (double theta : {0.0, 0.01, 0.5}) {
    const auto r = pfbo::pf_loglik(theta, s, wide, PFConfig{100, 0.5, 9});
    CHECK(std::abs(r.loglik - pfbo::kalman_loglik(theta, s, wide)) < 0.01);
  }
}

TEST_CASE("result structure and determinism") {
  const TimeSeries s = pfbo::simulate(LinearGaussianModel(0.012), 500, 1);
  const PFConfig cfg{1000, 0.5, 42};
  const auto a = pfbo::pf_loglik(0.01, s, LinearGaussianModel(), cfg);
  const auto b = pfbo::pf_loglik(0.01, s, LinearGaussianModel(), cfg);
  CHECK(a == b);
  REQUIRE(a.per_step_loglik.size() == 500);
  const double total = std::accumulate(a.per_step_loglik.begin(), a.per_step_loglik.end(), 0.0);
  CHECK(std::abs(total - a.loglik) < 1e-10);
  const auto c = pfbo::pf_loglik(0.01, s, LinearGaussianModel(), PFConfig{1000, 0.5, 43});
  CHECK(c.loglik != a.loglik);
  // Same series, same particle count: roughly the Kalman value.
  CHECK(std::abs(a.loglik - pfbo::kalman_loglik(0.01, s, LinearGaussianModel())) < 5.0);
}

TEST_CASE("weights stay normalized and resampling resets ESS to m") {
  const TimeSeries s = pfbo::simulate(LinearGaussianModel(0.012), 300, 4);
  std::size_t steps = 0, resamples = 0;
  const auto r = pfbo::particle_filter(
      LinearGaussianModel(0.012), s, PFConfig{500, 0.5, 5},
      [&](std::size_t t, const pfbo::ParticleState& st, bool resampled) {
        CHECK(t == steps);
        ++steps;
        CHECK(std::abs(st.weights.sum() - 1.0) < 1e-12);
        CHECK((st.weights >= 0.0).all());
        CHECK(st.size() == 500);
        if (resampled) {
          ++resamples;
          CHECK(pfbo::ess(st.weights) == doctest::Approx(500.0).epsilon(1e-12));
        } else {
          CHECK(pfbo::ess(st.weights) >= 250.0);
        }
      });
  CHECK(steps == 300);
  CHECK(resamples == r.resample_count);
  CHECK(resamples > 0);
}

TEST_CASE("threshold fraction 1 with a single particle resamples never") {
  const TimeSeries s = pfbo::simulate(LinearGaussianModel(0.012), 20, 4);
  const auto r = pfbo::pf_loglik(0.01, s, LinearGaussianModel(), PFConfig{1, 1.0, 5});
  CHECK(r.resample_count == 0);
  CHECK(std::isfinite(r.loglik));
}

TEST_CASE("degeneracy is reported with the step index") {
  const TimeSeries s({0.0, 1.0, 500.0, 2.0});
  try {
    pfbo::particle_filter(BrokenModel(), s, PFConfig{50, 0.5, 1});
    FAIL("expected degeneracy");
  } catch (const pfbo::ParticleDegeneracy& e) {
    CHECK(e.step() == 3);
    CHECK(std::string(e.what()).find("particle degeneracy") != std::string::npos);
  }
}

TEST_CASE("log-likelihood estimate is biased low and improves with m") {
  const TimeSeries s = pfbo::simulate(LinearGaussianModel(0.012), 100, 8);
  const double exact = pfbo::kalman_loglik(0.01, s, LinearGaussianModel());
  auto mean_gap = [&](std::size_t m) {
    double sum = 0;
    const int reps = 60;
    for (int r = 0; r < reps; ++r)
      sum += pfbo::pf_loglik(0.01, s, LinearGaussianModel(), PFConfig{m, 0.5, 1000u + r}).loglik - exact;
    return sum / reps;
  };
  const double small = mean_gap(50), large = mean_gap(2000);
  CHECK(small < 0.0);
  CHECK(std::abs(large) < std::abs(small));
}
