#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "skygrid/forecast.hpp"

using namespace skygrid;

namespace {

ForecastParams params(double a, double b, double g) {
  ForecastParams p;
  p.alpha = a;
  p.beta = b;
  p.gamma = g;
  return p;
}

}  // namespace

TEST_CASE("constant series converges to the constant") {
  HoltWinters hw(6, params(0.3, 0.05, 0.4), 1e9);
  for (int i = 0; i < 200; ++i) hw.update(42.0);
  for (double v : hw.predict(10)) CHECK(v == doctest::Approx(42.0).epsilon(1e-9));
}

TEST_CASE("periodic series is recovered exactly with alpha = beta = 0, gamma = 1") {
  const int L = 12;
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  std::vector<double> period(L);
  for (double& v : period) v = u(rng);
  HoltWinters hw(L, params(0.0, 0.0, 1.0), 1e9);
  for (int t = 0; t < 2 * L; ++t) hw.update(period[t % L]);
  REQUIRE(hw.ready());
  const auto f = hw.predict(L);
  for (int h = 0; h < L; ++h) CHECK(std::abs(f[h] - period[h]) <= 1e-9);
  // Also after a few extra steps the phase follows.
  for (int t = 2 * L; t < 2 * L + 5; ++t) hw.update(period[t % L]);
  const auto g = hw.predict(2 * L);
  for (int h = 0; h < 2 * L; ++h) CHECK(std::abs(g[h] - period[(2 * L + 5 + h) % L]) <= 1e-9);
}

TEST_CASE("zero series forecasts zero") {
  HoltWinters hw(4, params(0.3, 0.05, 0.4), 100.0);
  for (int i = 0; i < 8; ++i) hw.update(0.0);
  for (double v : hw.predict(6)) CHECK(v == 0.0);
}

TEST_CASE("clamp keeps outputs in [0, upper]") {
  HoltWinters hw(4, params(0.9, 0.9, 0.1), 10.0);
  // Steep evening ramp down drives the trend negative.
  for (double y : {9.0, 9.0, 9.0, 9.0, 8.0, 6.0, 4.0, 2.0, 1.0, 0.5}) hw.update(y);
  const auto raw = hw.predict_raw(12);
  CHECK(*std::min_element(raw.begin(), raw.end()) < 0.0);
  for (double v : hw.predict(12)) {
    CHECK(v >= 0.0);
    CHECK(v <= 10.0);
  }
  HoltWinters up(4, params(0.9, 0.9, 0.1), 10.0);
  for (double y : {1.0, 2.0, 4.0, 6.0, 8.0, 9.0, 10.0, 10.0}) up.update(y);
  for (double v : up.predict(20)) CHECK(v <= 10.0);
}

TEST_CASE("shift equivariance before clamping") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  HoltWinters a(5, params(0.3, 0.1, 0.4), 1e9), b(5, params(0.3, 0.1, 0.4), 1e9);
  for (int i = 0; i < 23; ++i) {
    const double y = u(rng);
    a.update(y);
    b.update(y + 7.5);
  }
  const auto fa = a.predict_raw(9), fb = b.predict_raw(9);
  for (int h = 0; h < 9; ++h) CHECK(fb[h] - fa[h] == doctest::Approx(7.5).epsilon(1e-12));
}

TEST_CASE("warm-up requirement and edge cases") {
  HoltWinters hw(4, params(0.3, 0.05, 0.4), 10.0);
  for (int i = 0; i < 7; ++i) hw.update(1.0);
  CHECK_FALSE(hw.ready());
  CHECK_THROWS_AS(hw.predict(3), ForecastNotReady);
  hw.update(1.0);
  CHECK(hw.ready());
  CHECK(hw.predict(0).empty());
  CHECK(hw.observations() == 8);
  CHECK_THROWS_AS(HoltWinters(1, params(0.3, 0.05, 0.4), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(HoltWinters(4, params(1.5, 0.05, 0.4), 1.0), std::invalid_argument);
}
