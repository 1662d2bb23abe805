#include <cmath>

#include "doctest.h"
#include "potkit/errors.hpp"
#include "potkit/kernels.hpp"
#include "potkit/measures.hpp"

using namespace potkit;

namespace {

double log_abs(const Point& p) {
  double r = norm(p);
  return r == 0 ? -INFINITY : std::log(r);
}

}  // namespace

TEST_CASE("integration against atoms and quadrature measures") {
  auto circle = sphere_measure(2, {0, 0}, 1.0, 256);
  CHECK(circle.total_mass() == doctest::Approx(1.0));
  CHECK(std::abs(integrate(log_abs, circle)) < 1e-12);

  auto d = DiscreteMeasure::dirac(2, {0.5, 0});
  CHECK(integrate(log_abs, d) == doctest::Approx(std::log(0.5)));

  // Mean of ln|z - w| over the unit disc for |w| < 1 is (|w|^2 - 1)/2 + ln 1.
  auto disc = ball_measure(2, {0, 0}, 1.0, 24, 256);
  auto shifted = [](const Point& p) { return std::log(distance(p, {0.3, 0.0})); };
  CHECK(integrate(shifted, disc) == doctest::Approx((0.09 - 1.0) / 2).epsilon(2e-3));

  auto hm = ball_harmonic_measure(2, {0, 0}, 1.0, {0.4, 0.2}, 512);
  auto harm = [](const Point& p) { return p.x * p.x - p.y * p.y + 3 * p.y; };
  CHECK(integrate(harm, hm) == doctest::Approx(harm({0.4, 0.2})).epsilon(1e-10));

  auto hm3 = ball_harmonic_measure(3, {0, 0, 0}, 1.0, {0.2, 0.1, -0.3}, 4000);
  auto harm3 = [](const Point& p) { return p.x * p.y + p.z; };
  CHECK(integrate(harm3, hm3) == doctest::Approx(harm3({0.2, 0.1, -0.3})).epsilon(1e-4));
}

TEST_CASE("extended-real conventions") {
  auto d = DiscreteMeasure::dirac(2, {0, 0});
  CHECK(integrate(log_abs, d) == -INFINITY);
  auto signed_mu = DiscreteMeasure::dirac(2, {0, 0}) - DiscreteMeasure::dirac(2, {0, 0}, 2.0);
  CHECK_THROWS_AS(integrate(log_abs, signed_mu), Error);
  auto nan = [](const Point&) { return NAN; };
  CHECK_THROWS_AS(integrate(nan, d), Error);
  auto tiny = DiscreteMeasure::dirac(2, {0, 0}, 1e-14) + DiscreteMeasure::dirac(2, {1, 0});
  CHECK(integrate(log_abs, tiny) == 0.0);
}

TEST_CASE("riesz measure of sampled potentials") {
  Grid g = Grid::covering({{-1, -1}, {1, 1}}, 1.0 / 64, 2);
  auto sq = ScalarField::sample(g, [](const Point& p) { return p.x * p.x + p.y * p.y; });
  auto mu = riesz_measure(sq);
  CHECK(mu.is_positive());
  const auto& dens = *mu.positive().density;
  for (std::size_t i = 0; i < dens.size(); ++i)
    if (dens.active(i)) CHECK(dens[i] == doctest::Approx(2.0 / M_PI).epsilon(1e-8));

  auto lg = ScalarField::sample(g, log_abs);
  auto ml = riesz_measure(lg);
  CHECK_FALSE(ml.non_subharmonic);
  double r = 5 * g.h;
  auto near = restrict_measure(ml, [&](const Point& p) { return norm(p) <= r; });
  auto far = restrict_measure(ml, [&](const Point& p) { return norm(p) > r; });
  // The pole sits on a node, so its unit mass spreads over the immediate stencil neighbours.
  CHECK(near.total_mass() == doctest::Approx(1.0).epsilon(0.05));
  CHECK(far.total_mass() < 0.05);
  CHECK((near + far).total_mass() == doctest::Approx(ml.total_mass()).epsilon(1e-12));

  auto cap = ScalarField::sample(g, [](const Point& p) { return -(p.x * p.x + p.y * p.y); });
  auto mc = riesz_measure(cap);
  CHECK(mc.non_subharmonic);
  CHECK(mc.negative_mass() > 0.5);
}

TEST_CASE("counting measures") {
  std::vector<ZeroPoint> zs;
  for (int k = 1; k <= 8; ++k) zs.push_back({{1.0 - std::ldexp(1.0, -k), 0}, 1});
  auto n = counting_measure(2, zs);
  auto inside = restrict_measure(n, [](const Point& p) { return norm(p) <= 0.9; });
  CHECK(inside.total_mass() == doctest::Approx(3.0));
  auto dup = counting_measure(2, {{{0, 0}, 2}, {{0, 0}, 1}});
  CHECK(dup.positive().atoms.size() == 1);
  CHECK(dup.total_mass() == doctest::Approx(3.0));
  CHECK_THROWS_AS(counting_measure(2, {{{0, 0}, 0}}), Error);
}

TEST_CASE("arithmetic") {
  auto a = DiscreteMeasure::dirac(2, {0, 0}, 2.0);
  auto b = DiscreteMeasure::dirac(2, {1, 0}, 1.0);
  auto c = a - b.scaled(3.0);
  CHECK(c.positive_mass() == doctest::Approx(2.0));
  CHECK(c.negative_mass() == doctest::Approx(3.0));
  CHECK_FALSE(c.is_positive());
  auto lin = [](const Point& p) { return 1.0 + p.x; };
  CHECK(integrate(lin, c) == doctest::Approx(2.0 - 6.0));
  auto m = DiscreteMeasure::from_atoms(2, {{{0, 0}, 1.0}, {{1e-6, 0}, 1.0}, {{1, 0}, 1.0}});
  m.merge_atoms(1e-3);
  CHECK(m.positive().atoms.size() == 2);
}
