#include <doctest.h>

#include <cmath>
#include <vector>

#include "tdhorde/errors.hpp"
#include "tdhorde/rng.hpp"
#include "tdhorde/td.hpp"
#include "test_util.hpp"

using namespace tdhorde;
using namespace tdhorde::testing;

namespace {

/// Dense reference: same update rule evaluated over every feature.
struct DenseTd {
  double alpha, gamma, lambda;
  std::vector<double> w, z;

  DenseTd(std::uint32_t n, double alpha_, double gamma_, double lambda_)
      : alpha(alpha_), gamma(gamma_), lambda(lambda_), w(n, 0.0), z(n, 0.0) {}

  double predict(const std::vector<double>& x) const {
    double v = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) v += w[i] * x[i];
    return v;
  }

  double update(const std::vector<double>& x_t, const std::vector<double>& x_next,
                double cumulant) {
    const double delta = cumulant + gamma * predict(x_next) - predict(x_t);
    for (std::size_t i = 0; i < w.size(); ++i) {
      z[i] = z[i] * gamma * lambda + x_t[i];
      w[i] += alpha * delta * z[i];
    }
    return delta;
  }
};

}  // namespace

TEST_SUITE("td") {

TEST_CASE("two hand-checked steps") {
  TdLearner learner(TdConfig{0.1, 0.9, 0.5, 2});
  const FeatureVector f0 = make_features(2, {0});
  const FeatureVector f1 = make_features(2, {1});

  // Fresh learner: delta = 1, z = x_t, w = alpha*delta*z.
  CHECK(learner.update(f0, f1, 1.0) == 1.0);
  CHECK(learner.weights()[0] == 0.1);
  CHECK(learner.weights()[1] == 0.0);
  CHECK(learner.trace()[0] == 1.0);
  CHECK(learner.trace()[1] == 0.0);

  // Second step: delta = 0 + 0.9*w0 - w1, z decays by gamma*lambda = 0.45.
  const double expected_delta = 0.0 + 0.9 * 0.1 - 0.0;
  const double delta = learner.update(f1, f0, 0.0);
  CHECK(delta == expected_delta);
  CHECK(learner.trace()[0] == 1.0 * 0.9 * 0.5 + 0.0);
  CHECK(learner.trace()[1] == 1.0);
  CHECK(learner.weights()[0] == 0.1 + 0.1 * delta * (1.0 * 0.9 * 0.5));
  CHECK(learner.weights()[1] == 0.0 + 0.1 * delta * 1.0);
}

TEST_CASE("sparse walk equals a dense evaluation bit for bit") {
  const std::uint32_t n = 32;
  TdLearner learner(TdConfig{0.02, 0.9, 0.9, n});
  DenseTd naive(n, 0.02, 0.9, 0.9);

  Rng rng(19);
  FeatureVector x_t = random_features(rng, n, 8);
  for (int step = 0; step < 500; ++step) {
    const FeatureVector x_next = random_features(rng, n, 8);
    const double cumulant = rng.gaussian(0.0, 1.0);
    const double a = learner.update(x_t, x_next, cumulant);
    const double b = naive.update(dense(x_t), dense(x_next), cumulant);
    REQUIRE(a == b);
    x_t = x_next;
  }
  CHECK(learner.weights() == naive.w);
  CHECK(learner.trace() == naive.z);
}

TEST_CASE("constant signal converges to the discounted fixed point") {
  const std::uint32_t n = 8;
  TdLearner learner(TdConfig{0.05, 0.9, 0.0, n});
  const FeatureVector x = make_features(n, {0, 1, 2});
  for (int step = 0; step < 20000; ++step) learner.update(x, x, 0.5);
  CHECK(learner.predict(x) == doctest::Approx(0.5 / (1.0 - 0.9)).epsilon(1e-6));
}

TEST_CASE("lambda = 0 leaves the trace equal to the last input") {
  TdLearner learner(TdConfig{0.1, 0.9, 0.0, 6});
  Rng rng(5);
  FeatureVector x_t = random_features(rng, 6, 3);
  for (int step = 0; step < 20; ++step) {
    const FeatureVector x_next = random_features(rng, 6, 3);
    learner.update(x_t, x_next, rng.uniform01());
    CHECK(learner.trace() == dense(x_t));
    x_t = x_next;
  }
}

TEST_CASE("prediction is zero on an empty active set and updates still work") {
  TdLearner learner(TdConfig{0.1, 0.9, 0.9, 4});
  const FeatureVector empty = make_features(4, {});
  CHECK(learner.predict(empty) == 0.0);
  CHECK(learner.update(empty, empty, 2.5) == 2.5);
  CHECK(learner.weights() == std::vector<double>(4, 0.0));
}

TEST_CASE("oversized step size raises a divergence error") {
  TdLearner learner(TdConfig{100.0, 0.9, 0.9, 4});
  const FeatureVector x = make_features(4, {0, 1});
  CHECK_THROWS_AS(
      [&] {
        for (int step = 0; step < 500; ++step) learner.update(x, x, 1.0);
      }(),
      DivergenceError);
}

TEST_CASE("configuration and input validation") {
  CHECK_THROWS_AS(TdLearner(TdConfig{0.0, 0.9, 0.9, 4}), ConfigError);
  CHECK_THROWS_AS(TdLearner(TdConfig{0.1, 1.0, 0.9, 4}), ConfigError);
  CHECK_THROWS_AS(TdLearner(TdConfig{0.1, -0.1, 0.9, 4}), ConfigError);
  CHECK_THROWS_AS(TdLearner(TdConfig{0.1, 0.9, 1.1, 4}), ConfigError);
  CHECK_THROWS_AS(TdLearner(TdConfig{0.1, 0.9, 0.9, 0}), ConfigError);

  TdLearner learner(TdConfig{0.1, 0.9, 0.9, 4});
  CHECK_THROWS_AS(learner.update(make_features(3, {0}), make_features(4, {0}), 1.0), DataError);
  CHECK_THROWS_AS(learner.update(make_features(4, {0}), make_features(4, {0}),
                                 std::numeric_limits<double>::infinity()),
                  DataError);
  CHECK(learner.state_bytes() >= 2 * 4 * sizeof(double));
}

}  // TEST_SUITE("td")
