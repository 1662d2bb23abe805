#include <cmath>

#include "doctest.h"
#include "potkit/errors.hpp"
#include "potkit/geometry.hpp"

using namespace potkit;

TEST_CASE("parallel sets") {
  auto unit = parallel_set(CompactSet::point(2, {0, 0}), 1.0);
  CHECK(unit.kind() == Domain::Kind::ball);
  CHECK(unit.contains({0.99, 0}));
  CHECK_FALSE(unit.contains({1.0, 0}));

  auto two = parallel_set(CompactSet::ball(2, {0, 0}, 1.0), 1.0);
  CHECK(two.radius() == doctest::Approx(2.0));

  CompactSet pair(2, {{{0, 0}, 0.0}, {{3, 0}, 0.0}});
  auto dd = parallel_set(pair, 1.0);
  Grid g = Grid::covering({{-2, -2}, {5, 2}}, 0.05, 2);
  Mask m(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) m[i] = dd.contains(g.point(i));
  CHECK(connected_components(g, m).size() == 2);

  CHECK_THROWS_AS(parallel_set(pair, 0.0), Error);
}

TEST_CASE("parallel sets are nested") {
  auto S = CompactSet::segment(2, {0, 0}, {1, 0.5}, 40);
  auto a = parallel_set(S, 0.1), b = parallel_set(S, 0.2);
  Grid g = Grid::covering({{-0.5, -0.5}, {1.5, 1.0}}, 0.02, 2);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (a.contains(g.point(i))) CHECK(b.contains(g.point(i)));
}

TEST_CASE("separation") {
  auto disc = Domain::ball(2, {0, 0}, 1.0);
  CHECK(separation(CompactSet::point(2, {0, 0}), disc) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(separation(CompactSet::ball(2, {0, 0}, 0.25), disc) == doctest::Approx(0.75).epsilon(1e-9));
  CHECK_THROWS_AS(separation(CompactSet::point(2, {0, 0}), Domain::annulus(2, {0, 0}, 0.5, 2.0)), Error);
}

TEST_CASE("regular enclosing domain") {
  auto d = regular_enclosing_domain(CompactSet::point(2, {0, 0}), 1.0, 3.0);
  CHECK(d.kind() == Domain::Kind::ball);
  CHECK(d.radius() == doctest::Approx(2.0));
  CHECK(d.regular());

  auto S = CompactSet::segment(2, {0, 0}, {1, 0}, 201);
  auto stadium = regular_enclosing_domain(S, 0.1, 0.3);
  auto inner = parallel_set(S, 0.1), outer = parallel_set(S, 0.3);
  Grid g = Grid::covering({{-0.5, -0.5}, {1.5, 0.5}}, 0.01, 2);
  auto dist_segment = [](const Point& p) {
    double t = std::clamp(p.x, 0.0, 1.0);
    return std::hypot(p.x - t, p.y);
  };
  int mismatches = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    Point p = g.point(i);
    if (inner.contains(p)) CHECK(stadium.contains(p));
    if (stadium.contains(p)) CHECK(outer.contains(p));
    double ds = dist_segment(p);
    if (std::abs(ds - 0.2) > 1e-3 && stadium.contains(p) != (ds < 0.2)) ++mismatches;
  }
  CHECK(mismatches == 0);

  CompactSet pair(2, {{{0, 0}, 0.0}, {{3, 0}, 0.0}});
  CHECK_THROWS_AS(regular_enclosing_domain(pair, 0.1, 0.3), Error);
  CHECK_THROWS_AS(regular_enclosing_domain(S, 0.3, 0.3), Error);
}

TEST_CASE("connected components") {
  Grid g = Grid::covering({{-2, -2}, {2, 2}}, 0.05, 2);
  Mask annulus(g.size()), empty(g.size(), 0), two(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    double r = norm(g.point(i));
    annulus[i] = r > 0.5 && r < 1.5;
    two[i] = distance(g.point(i), {-1, 0}) < 0.5 || distance(g.point(i), {1, 0}) < 0.5;
  }
  CHECK(connected_components(g, annulus).size() == 1);
  CHECK(connected_components(g, empty).empty());
  auto comps = connected_components(g, two);
  REQUIRE(comps.size() == 2);
  // The component containing the smaller cell index comes first.
  std::size_t first0 = 0, first1 = 0;
  while (!comps[0][first0]) ++first0;
  while (!comps[1][first1]) ++first1;
  CHECK(first0 < first1);

  // Diagonal contacts do not connect.
  Grid s = Grid::covering({{0, 0}, {1, 1}}, 1.0, 2);
  Mask diag(s.size(), 0);
  diag[s.index(0, 0)] = 1;
  diag[s.index(1, 1)] = 1;
  CHECK(connected_components(s, diag).size() == 2);
}

TEST_CASE("domain oracles") {
  auto ann = Domain::annulus(2, {0, 0}, 0.5, 2.0);
  CHECK(ann.contains({1, 0}));
  CHECK_FALSE(ann.contains({0.1, 0}));
  CHECK(ann.signed_distance({1, 0}) == doctest::Approx(-0.5));
  auto hs = Domain::half_space(2, {0, 2}, 2.0);
  CHECK(hs.signed_distance({0, 0}) == doctest::Approx(-1.0));
  auto q = hs.project_to_boundary({0.3, -4});
  CHECK(q.y == doctest::Approx(1.0));

  auto sq = Domain::implicit(
      2, [](const Point& p) { return std::max(std::abs(p.x), std::abs(p.y)) - 1.0; }, {{-1.5, -1.5}, {1.5, 1.5}}, true);
  auto pts = sq.boundary_sample(64);
  CHECK(pts.size() > 100);
  for (const auto& p : pts) CHECK(std::abs(std::max(std::abs(p.x), std::abs(p.y)) - 1.0) < 1e-6);
  Grid g = Grid::covering(sq.bounding_box(), 0.1, 2);
  for (std::size_t i = 0; i < g.size(); ++i) {
    Point p = g.point(i);
    CHECK(sq.contains(p) == (sq.signed_distance(p) < 0));
  }
}
