#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "doctest.h"
#include "potkit/errors.hpp"
#include "potkit/kernels.hpp"

using namespace potkit;

TEST_CASE("k_q values") {
  CHECK(k_q(0.0, 1.0) == 0.0);
  CHECK(k_q(1.0, 2.0) == doctest::Approx(-0.5));
  CHECK(k_q(-1.0, 3.0) == doctest::Approx(3.0));
  CHECK_THROWS_AS(k_q(0.0, 0.0), Error);
  CHECK_THROWS_AS(k_q(1.0, -1.0), Error);
}

TEST_CASE("k_q is increasing in t") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> q(-4.0, 4.0), t(1e-3, 10.0);
  for (int i = 0; i < 2000; ++i) {
    double qq = q(rng), a = t(rng), b = t(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    CHECK(k_q(qq, a) < k_q(qq, b));
  }
}

TEST_CASE("kernel_K") {
  CHECK(kernel_K(2, {0, 0}, {1, 0}) == 0.0);
  CHECK(kernel_K(3, {0, 0, 0}, {0, 2, 0}) == doctest::Approx(-0.5));
  CHECK(kernel_K(2, {0.3, 0.1}, {0.3, 0.1}) == -std::numeric_limits<double>::infinity());
  CHECK(kernel_K(3, {1, 1, 1}, {1, 1, 1}) == -std::numeric_limits<double>::infinity());
  CHECK(kernel_K(1, {0.5}, {0.5}) == 0.0);
  CHECK(kernel_K(1, {0.5}, {2.0}) == doctest::Approx(1.5));

  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  for (int i = 0; i < 200; ++i) {
    Point x(n(rng), n(rng), n(rng)), y(n(rng), n(rng), n(rng)), a(n(rng), n(rng), n(rng));
    for (int d = 1; d <= 3; ++d) {
      CHECK(kernel_K(d, x, y) == kernel_K(d, y, x));
      CHECK(kernel_K(d, x + a, y + a) == doctest::Approx(kernel_K(d, x, y)).epsilon(1e-9));
    }
  }
}

TEST_CASE("constants") {
  CHECK(riesz_constant(2) == 1.0 / (2.0 * std::numbers::pi));
  CHECK(riesz_constant(3) == 1.0 / (4.0 * std::numbers::pi));
  CHECK(riesz_constant(1) == 0.5);
  CHECK(ball_volume(0) == 1.0);
  CHECK(ball_volume(1) == 2.0);
  CHECK(ball_volume(2) == std::numbers::pi);
  CHECK(ball_volume(3) == doctest::Approx(4.0 * std::numbers::pi / 3.0));
  CHECK(sphere_area(0) == 2.0);
  CHECK(sphere_area(2) == doctest::Approx(4.0 * std::numbers::pi));
}
