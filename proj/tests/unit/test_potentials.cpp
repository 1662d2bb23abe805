#include <cmath>
#include <random>

#include "doctest.h"
#include "potkit/errors.hpp"
#include "potkit/green.hpp"
#include "potkit/kernels.hpp"
#include "potkit/potentials.hpp"
#include "potkit/rng.hpp"

using namespace potkit;

namespace {

DiscreteMeasure circle(int n = 512) { return sphere_measure(2, {0, 0}, 1.0, n); }

}  // namespace

TEST_CASE("potential evaluation") {
  Potential pa(DiscreteMeasure::dirac(2, {0.3, 0.4}));
  CHECK(pa({1.3, 0.4}) == doctest::Approx(0.0));
  CHECK(pa({0.3, 0.4}) == -INFINITY);

  Potential pw(circle());
  CHECK(std::abs(pw({0.2, -0.5})) < 1e-12);
  CHECK(pw({1.5, 2.0}) == doctest::Approx(std::log(2.5)).epsilon(1e-12));

  auto p = duality_forward(circle(), {0, 0});
  CHECK(p({0.5, 0}) == doctest::Approx(-std::log(0.5)).epsilon(1e-12));
  CHECK(p({0.5, 0}) == doctest::Approx(green({Domain::ball(2, {0, 0}, 1.0), {0, 0}}, {0.5, 0})).epsilon(1e-12));
  CHECK(p({0, 0}) == INFINITY);

  // pt_{delta_o - delta_o} vanishes identically, including at o.
  auto z = duality_forward(DiscreteMeasure::dirac(2, {0.1, 0.1}), {0.1, 0.1});
  CHECK(z({0.7, -0.2}) == doctest::Approx(0.0));
  CHECK(z({0.1, 0.1}) == 0.0);

  auto bad = DiscreteMeasure::dirac(2, {0, 0}) - DiscreteMeasure::dirac(2, {0, 0}, 0.5);
  Potential pb(bad);
  CHECK_THROWS_AS(pb({0, 0}), Error);

  // Affinity of the duality map.
  auto m1 = DiscreteMeasure::dirac(2, {0.2, 0.1});
  auto m2 = circle(64);
  double t = 0.3;
  Point y{-0.4, 0.25};
  double lhs = duality_forward(m1.scaled(t) + m2.scaled(1 - t), {0, 0})(y);
  double rhs = t * duality_forward(m1, {0, 0})(y) + (1 - t) * duality_forward(m2, {0, 0})(y);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("density cells use ball averages near the evaluation point") {
  Grid g = Grid::covering({{-1, -1}, {1, 1}}, 1.0 / 32, 2);
  // Uniform density 1/pi on the unit disc: pt(y) = (|y|^2 - 1)/2 inside.
  auto dens = ScalarField::sample(g, [](const Point& p) { return norm(p) < 1.0 ? 1.0 / M_PI : 0.0; });
  DiscreteMeasure mu(2);
  mu.positive().density = dens;
  Potential pt(mu);
  for (Point y : {Point{0, 0}, Point{0.3, 0.2}, Point{0.5 + 1.0 / 64, 0}})
    CHECK(pt(y) == doctest::Approx((dot(y, y) - 1) / 2).epsilon(0.02));
}

TEST_CASE("lower bounds") {
  CompactSet L = CompactSet::ball(2, {0, 0}, 1.0);
  CHECK(potential_lower_bound(DiscreteMeasure::dirac(2, {2, 0}), L) == doctest::Approx(0.0));
  CHECK(potential_lower_bound(DiscreteMeasure::dirac(2, {1 + M_E, 0}, 2.0), L) == doctest::Approx(2.0));
  CHECK(potential_lower_bound(DiscreteMeasure::dirac(2, {0.5, 0}), L) == -INFINITY);
  CHECK(potential_lower_bound_dirac(circle(), {0, 0}, CompactSet::ball(2, {0, 0}, 0.5)) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(potential_lower_bound_dirac(DiscreteMeasure::dirac(2, {2, 0}), {0, 0}, L) == doctest::Approx(0.0));

  // Randomised: the bound never exceeds sampled values on L.
  Rng rng(derive_seed(5, 0));
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Atom> atoms;
    for (int k = 0; k < 3; ++k)
      atoms.push_back({{4 * uniform01(rng) - 2, 4 * uniform01(rng) - 2}, 0.1 + uniform01(rng)});
    auto mu = DiscreteMeasure::from_atoms(2, atoms);
    Point o{uniform01(rng) - 0.5, uniform01(rng) - 0.5};
    CompactSet Ls = CompactSet::ball(2, {uniform01(rng) - 0.5, uniform01(rng) - 0.5}, 0.2 + 0.3 * uniform01(rng));
    double b = potential_lower_bound_dirac(mu, o, Ls);
    double b0 = potential_lower_bound(mu, Ls);
    auto p = duality_forward(mu, o);
    Potential p0(mu);
    const Ball& ball = Ls.balls()[0];
    for (int s = 0; s < 50; ++s) {
      double rr = ball.radius * std::sqrt(uniform01(rng)), th = 2 * M_PI * uniform01(rng);
      Point y = ball.center + Point{rr * std::cos(th), rr * std::sin(th)};
      CHECK(p(y) >= b - 1e-12);
      CHECK(p0(y) >= b0 - 1e-12);
      ++checked;
    }
  }
  CHECK(checked == 5000);
}

TEST_CASE("duality inverse") {
  Grid g = Grid::covering({{-1.25, -1.25}, {1.25, 1.25}}, 1.0 / 64, 2);
  GreenFunction gd({Domain::ball(2, {0, 0}, 1.0), {0, 0}});
  auto V = gd.sample(g);
  DualityOptions opts;
  opts.pole.near_pole = gd.as_function();
  auto res = duality_inverse(V, {0, 0}, opts);
  CHECK(res.dirac_coefficient == doctest::Approx(0.0).epsilon(0.05));
  auto ring = restrict_measure(res.measure, [&](const Point& p) { return std::abs(norm(p) - 1.0) <= 3 * g.h; });
  CHECK(ring.total_mass() == doctest::Approx(1.0).epsilon(0.02));

  // Without the analytic evaluator the grid is interpolated at radii >= 4h.
  auto res_grid = duality_inverse(V, {0, 0});
  CHECK(res_grid.dirac_coefficient == doctest::Approx(0.0).epsilon(0.05));

  ScalarField zero(g, 0.0);
  auto rz = duality_inverse(zero, {0, 0});
  CHECK(rz.dirac_coefficient == doctest::Approx(1.0));
  CHECK(std::abs(rz.measure.total_mass()) < 1e-12);

  // Round trip of a 3-atom probability measure.
  auto mu = DiscreteMeasure::from_atoms(2, {{{0.4, 0.1}, 0.5}, {{-0.2, 0.5}, 0.3}, {{-0.3, -0.45}, 0.2}});
  auto P = duality_forward(mu, {0, 0});
  Grid big = Grid::covering({{-3, -3}, {3, 3}}, 1.0 / 32, 2);
  auto W = P.sample(big);
  DualityOptions o2;
  o2.pole.near_pole = P.as_function();
  auto back = duality_inverse(W, {0, 0}, o2);
  CHECK(back.measure.total_mass() == doctest::Approx(1.0).epsilon(0.02));
  CHECK(back.dirac_coefficient == doctest::Approx(0.0).epsilon(0.05));
}

TEST_CASE("potential classification") {
  Domain D = Domain::ball(2, {0, 0}, 1.0);
  Grid g = Grid::covering({{-1.1, -1.1}, {1.1, 1.1}}, 1.0 / 64, 2);
  GreenFunction inner({Domain::ball(2, {0.05, 0}, 0.7), {0, 0}});
  auto V = inner.sample(g);
  ClassifyOptions opts;
  opts.pole.near_pole = inner.as_function();
  auto c = classify_potential(V, D, {0, 0}, opts);
  CHECK(c.cls == PotentialClass::JP1);

  ScalarField half = V;
  for (auto& x : half.values()) x *= 0.5;
  ClassifyOptions oh = opts;
  oh.pole.near_pole = [&](const Point& p) { return 0.5 * inner(p); };
  CHECK(classify_potential(half, D, {0, 0}, oh).cls == PotentialClass::JP);

  GreenFunction whole({D, {0, 0}});
  auto W = whole.sample(g);
  for (auto& x : W.values()) x *= 2.0;
  ClassifyOptions ow;
  ow.pole.near_pole = [&](const Point& p) { return 2.0 * whole(p); };
  CHECK(classify_potential(W, D, {0, 0}, ow).cls == PotentialClass::none);

  // Without analytic help the pole fit runs on the grid.
  CHECK(classify_potential(V, D, {0, 0}).cls == PotentialClass::JP1);
}

TEST_CASE("jensen measure check") {
  Domain D = Domain::ball(2, {0, 0}, 1.0);
  auto disc = ball_measure(2, {0, 0}, 1.0, 32, 256);
  auto rep = jensen_measure_check(disc, {0, 0}, D);
  CHECK(rep.passed);

  JensenOptions as;
  as.variant = MeasureVariant::arens_singer;
  auto ra = jensen_measure_check(circle(), {0, 0}, D, as);
  CHECK(ra.passed);
  CHECK(std::abs(ra.worst_margin) < 1e-9);

  auto bad = jensen_measure_check(DiscreteMeasure::dirac(2, {0.5, 0}), {0, 0}, D);
  CHECK_FALSE(bad.passed);
  CHECK(bad.worst_margin < 0.0);

  auto hm = ball_harmonic_measure(2, {0, 0}, 0.6, {0.2, 0.1}, 512);
  CHECK(jensen_measure_check(hm, {0.2, 0.1}, D).passed);
  // Jensen measures are Arens-Singer measures.
  CHECK(jensen_measure_check(hm, {0.2, 0.1}, D, as).passed);
}

TEST_CASE("poisson-jensen residual") {
  Point a{0.3, 0};
  auto u = [&](const Point& p) { return std::log(distance(p, a)); };
  auto r = poisson_jensen_check(u, DiscreteMeasure::dirac(2, a), circle(), {0, 0});
  CHECK(r.residual < 1e-10);
  CHECK(r.u_o == doctest::Approx(std::log(0.3)));

  auto harm = [](const Point& p) { return p.x * p.x - p.y * p.y + p.x; };
  CHECK(poisson_jensen_check(harm, DiscreteMeasure(2), circle(), {0, 0}).residual < 1e-10);

  CHECK_THROWS_AS(poisson_jensen_check([](const Point& p) { return std::log(norm(p)); },
                                       DiscreteMeasure::dirac(2, {0, 0}), circle(), {0, 0}),
                  Error);
}
