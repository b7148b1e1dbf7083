#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "optfair/optimizer.hpp"
#include "optfair/rng.hpp"

using namespace optfair;

namespace {

OptimizerConfig config_for(Algorithm a, double eta) {
  OptimizerConfig c;
  c.algorithm = a;
  c.eta = eta;
  return c;
}

}  // namespace

TEST_CASE("sgd step matches hand evaluation") {
  auto s = OptimizerState::init({1.0});
  const double g = 0.5;
  step(s, config_for(Algorithm::SGD, 0.1), std::span<const double>(&g, 1));
  CHECK(s.w[0] == doctest::Approx(0.95).epsilon(1e-15));
  CHECK(s.k == 1);
}

TEST_CASE("rmsprop first step keeps epsilon inside the root") {
  auto s = OptimizerState::init({0.0});
  auto c = config_for(Algorithm::RMSProp, 0.1);
  c.epsilon = 0.0;  // the update is defined without it for nonzero gradients
  const double g = 1.0;
  step(s, c, std::span<const double>(&g, 1));
  CHECK(s.v[0] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(s.w[0] == doctest::Approx(-0.1 / std::sqrt(0.1)).epsilon(1e-12));
}

TEST_CASE("adam first step equals -eta * sign(grad)") {
  auto s = OptimizerState::init({0.0, 0.0});
  auto c = config_for(Algorithm::Adam, 0.01);
  c.epsilon = 0.0;
  const std::vector<double> g = {2.0, -0.3};
  step(s, c, g);
  CHECK(s.w[0] == doctest::Approx(-0.01).epsilon(1e-12));
  CHECK(s.w[1] == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("zero gradient is a fixed point when moments are zero") {
  for (auto a : {Algorithm::SGD, Algorithm::SGDMomentum, Algorithm::RMSProp, Algorithm::Adam,
                 Algorithm::AdaBound}) {
    auto s = OptimizerState::init({0.7});
    const double g = 0.0;
    step(s, config_for(a, 0.1), std::span<const double>(&g, 1));
    CHECK(s.w[0] == 0.7);
  }
}

TEST_CASE("dimension and finiteness guards") {
  auto s = OptimizerState::init({0.0});
  const std::vector<double> wrong = {1.0, 2.0};
  CHECK_THROWS_AS(step(s, config_for(Algorithm::SGD, 0.1), wrong), ValidationError);
  const double bad = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(step(s, config_for(Algorithm::SGD, 0.1), std::span<const double>(&bad, 1)),
                  NumericError);
}

TEST_CASE("all algorithms minimize a quadratic with default settings") {
  for (auto a : {Algorithm::SGD, Algorithm::SGDMomentum, Algorithm::RMSProp, Algorithm::Adam,
                 Algorithm::AdamW, Algorithm::AdaBound}) {
    auto s = OptimizerState::init({1.0});
    const auto c = config_for(a, 0.1);
    for (int k = 0; k < 10000 && std::fabs(s.w[0]) >= 1e-3; ++k) {
      const double g = s.w[0];  // gradient of w^2/2
      step(s, c, std::span<const double>(&g, 1));
    }
    CHECK(std::fabs(s.w[0]) < 1e-3);
  }
}

TEST_CASE("first-step magnitude bound for normalized algorithms") {
  SeededStream rng(11, 0);
  for (auto a : {Algorithm::RMSProp, Algorithm::Adam}) {
    for (int trial = 0; trial < 200; ++trial) {
      auto s = OptimizerState::init({0.0});
      auto c = config_for(a, 0.1);
      const double g = gaussian(rng, 0.0, 5.0);
      if (g == 0.0) continue;
      step(s, c, std::span<const double>(&g, 1));
      const double limit = a == Algorithm::RMSProp
                               ? c.eta / std::sqrt(1.0 - c.gamma) + c.eta
                               : c.eta + c.eta;  // bias correction caps Adam at eta
      CHECK(std::fabs(s.w[0]) <= limit);
    }
  }
}

TEST_CASE("second moment stays non-negative under random gradients") {
  SeededStream rng(12, 0);
  auto s = OptimizerState::init({0.0, 0.0, 0.0});
  const auto c = config_for(Algorithm::RMSProp, 0.01);
  bool ok = true;
  for (int k = 0; k < 100000; ++k) {
    const std::vector<double> g = {gaussian(rng, 0.0, 1.0), gaussian(rng, 1.0, 2.0),
                                   gaussian(rng, -3.0, 0.5)};
    step(s, c, g);
    for (double v : s.v) ok = ok && v >= 0.0;
  }
  CHECK(ok);
}

TEST_CASE("adabound with pinned bounds reproduces -c * m_hat exactly") {
  auto c = config_for(Algorithm::AdaBound, 0.1);
  c.adabound_gamma = std::numeric_limits<double>::infinity();
  c.adabound_final_lr = 0.05;
  const auto [lower, upper] = adabound_bounds(c, 1);
  CHECK(lower == 0.05);
  CHECK(upper == 0.05);

  auto s = OptimizerState::init({0.3});
  const double g = 1.7;
  step(s, c, std::span<const double>(&g, 1));
  // First step: m_hat equals the gradient exactly after bias correction.
  CHECK(s.w[0] == 0.3 - 0.05 * 1.7);
}

TEST_CASE("adabound bounds widen at small k and tighten toward final_lr") {
  OptimizerConfig c = config_for(Algorithm::AdaBound, 0.1);
  const auto [lo1, up1] = adabound_bounds(c, 1);
  const auto [lo2, up2] = adabound_bounds(c, 1000000);
  CHECK(lo1 < lo2);
  CHECK(up1 > up2);
  CHECK(lo2 == doctest::Approx(c.adabound_final_lr).epsilon(1e-2));
  CHECK(up2 == doctest::Approx(c.adabound_final_lr).epsilon(1e-2));
}

TEST_CASE("effective rate for preconditioned algorithms") {
  auto s = OptimizerState::init({0.0, 0.0});
  s.v = {1.0, 4.0};
  s.k = 50;
  auto c = config_for(Algorithm::RMSProp, 0.1);
  c.epsilon = 0.0;
  const auto r = effective_rate(s, c);
  CHECK(r[0] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(r[1] == doctest::Approx(0.05).epsilon(1e-12));

  CHECK_THROWS_AS(effective_rate(s, config_for(Algorithm::SGD, 0.1)),
                  UnsupportedAlgorithmError);
  CHECK_THROWS_AS(effective_rate(s, config_for(Algorithm::SGDMomentum, 0.1)),
                  UnsupportedAlgorithmError);
}

TEST_CASE("momentum accumulates before the update") {
  auto s = OptimizerState::init({0.0});
  auto c = config_for(Algorithm::SGDMomentum, 0.1);
  c.momentum = 0.5;
  const double g = 1.0;
  step(s, c, std::span<const double>(&g, 1));
  CHECK(s.w[0] == doctest::Approx(-0.1));
  step(s, c, std::span<const double>(&g, 1));
  CHECK(s.w[0] == doctest::Approx(-0.1 - 0.1 * 1.5));
}

TEST_CASE("adamw applies decoupled decay before the adaptive update") {
  auto plain = OptimizerState::init({1.0});
  auto decayed = OptimizerState::init({1.0});
  auto ca = config_for(Algorithm::Adam, 0.01);
  auto cw = config_for(Algorithm::AdamW, 0.01);
  cw.weight_decay = 0.5;  // exaggerated so the difference is visible
  const double g = 1.0;
  step(plain, ca, std::span<const double>(&g, 1));
  step(decayed, cw, std::span<const double>(&g, 1));
  // Same adaptive displacement, applied after shrinking w by eta*decay*w.
  const double adaptive = plain.w[0] - 1.0;
  CHECK(decayed.w[0] == doctest::Approx(1.0 - 0.01 * 0.5 + adaptive).epsilon(1e-12));
}

TEST_CASE("config validation rejects out-of-range values") {
  OptimizerConfig c;
  c.eta = -1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = OptimizerConfig{};
  c.gamma = 1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = OptimizerConfig{};
  c.momentum = 1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}
