#include <cmath>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "potkit/errors.hpp"
#include "potkit/fields.hpp"

using namespace potkit;

namespace {

Grid box_grid(double half, double h) { return Grid::covering({{-half, -half}, {half, half}}, h, 2); }

double max_abs_active(const ScalarField& f, const std::function<bool(const Point&)>& where) {
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f.active(i) && where(f.grid().point(i))) m = std::max(m, std::abs(f[i]));
  return m;
}

}  // namespace

TEST_CASE("discrete laplacian") {
  Grid g = box_grid(1.0, 1.0 / 64);
  auto sq = ScalarField::sample(g, [](const Point& p) { return p.x * p.x + p.y * p.y; });
  auto l = discrete_laplacian(sq);
  CHECK(max_abs_active(l, [](const Point&) { return true; }) == doctest::Approx(4.0));
  for (std::size_t i = 0; i < l.size(); ++i)
    if (l.active(i)) CHECK(l[i] == doctest::Approx(4.0).epsilon(1e-9));

  auto harm = ScalarField::sample(g, [](const Point& p) { return p.x * p.x - p.y * p.y; });
  CHECK(max_abs_active(discrete_laplacian(harm), [](const Point&) { return true; }) < 1e-8);

  auto lg = ScalarField::sample(
      g, [](const Point& p) { return std::log(norm(p)); },
      [](const Point& p) { double r = norm(p); return r > 0.3 && r < 0.95; });
  auto ll = discrete_laplacian(lg);
  CHECK(max_abs_active(ll, [](const Point&) { return true; }) < 0.05);
  // Edge cells of the mask are flagged rather than evaluated.
  std::size_t edge = g.index(g.n[0] / 2 + static_cast<int>(std::round(0.3 / g.h)) + 1, g.n[1] / 2);
  CHECK(lg.active(edge));
  CHECK_FALSE(ll.active(edge));
}

TEST_CASE("spherical mean") {
  Grid g = box_grid(1.0, 1.0 / 128);
  auto lg = ScalarField::sample(g, [](const Point& p) { return std::log(norm(p)); });
  lg[g.index(g.n[0] / 2, g.n[1] / 2)] = -std::numeric_limits<double>::infinity();
  CHECK(spherical_mean(lg, {0, 0}, 0.5) == doctest::Approx(std::log(0.5)).epsilon(1e-4));
  CHECK(spherical_mean(lg, {0.8, 0}, 0.1) == doctest::Approx(std::log(0.8)).epsilon(1e-3));
  auto sq = ScalarField::sample(g, [](const Point& p) { return p.x * p.x + p.y * p.y; });
  CHECK(spherical_mean(sq, {0, 0}, 0.3) == doctest::Approx(0.09).epsilon(1e-3));
  CHECK_THROWS_AS(spherical_mean(sq, {0.9, 0}, 0.3), Error);
}

TEST_CASE("subharmonicity test") {
  Grid g = box_grid(1.0, 1.0 / 64);
  std::vector<double> radii{6 * g.h, 10 * g.h};
  auto lg = ScalarField::sample(g, [](const Point& p) { double r = norm(p); return r == 0 ? -INFINITY : std::log(r); });
  auto rep = subharmonicity_test(lg, radii);
  CHECK(rep.tested > 1000);
  CHECK(rep.violations == 0);

  auto neg = ScalarField::sample(g, [](const Point& p) { return -(p.x * p.x + p.y * p.y); });
  auto rn = subharmonicity_test(neg, radii);
  CHECK(rn.tested > 1000);
  CHECK(rn.violations == rn.tested);

  auto re = ScalarField::sample(g, [](const Point& p) { return p.x; });
  auto rr = subharmonicity_test(re, radii);
  CHECK(rr.violations == 0);
  CHECK(rr.worst_margin < 1e-9);
}

TEST_CASE("glue_max") {
  Grid g = box_grid(1.2, 1.0 / 64);
  auto in_disc = [](const Point& p) { return norm(p) < 1.0; };
  auto in_ann = [](const Point& p) { double r = norm(p); return r > 0.5 && r < 1.0; };
  auto u = ScalarField::sample(g, [](const Point&) { return 0.0; }, in_disc);
  auto u0 = ScalarField::sample(g, [](const Point& p) { return std::log(norm(p)) / std::log(2.0) - 1.0; }, in_ann);
  auto U = glue_max(u, u0);
  CHECK(subharmonicity_test(U, {4 * g.h}).violations == 0);
  for (std::size_t i = 0; i < U.size(); ++i)
    if (u.active(i)) CHECK(U[i] == 0.0);

  // A +1 violation on the inner boundary of the annulus.
  auto bad = ScalarField::sample(g, [](const Point&) { return 1.0; }, in_ann);
  CHECK_THROWS_AS(glue_max(u, bad), Error);

  // u0 >= u somewhere in the overlap: U >= both inputs.
  auto bump = ScalarField::sample(g, [](const Point& p) { return 0.1 - std::abs(norm(p) - 0.75); }, in_ann);
  auto Ub = glue_max(u, bump, {0.2});
  for (std::size_t i = 0; i < Ub.size(); ++i)
    if (bump.active(i)) CHECK(Ub[i] >= std::max(u[i], bump[i]));
}

TEST_CASE("harmonic replacement") {
  Grid g = box_grid(2.3, 1.0 / 32);
  auto sq = ScalarField::sample(g, [](const Point& p) { return p.x * p.x + p.y * p.y; });
  Mask shell(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    double r = norm(g.point(i));
    shell[i] = r > 1.0 && r < 2.0;
  }
  RelaxationInfo info;
  auto H = harmonic_replacement(sq, shell, {}, &info);
  CHECK(info.residual < 1e-8);
  const double a = 3.0 / std::log(2.0);
  double worst = 0.0;
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!shell[i]) continue;
    double r = norm(g.point(i));
    worst = std::max(worst, std::abs(H[i] - (a * std::log(r) + 1.0)));
    lo = std::min(lo, H[i]);
    hi = std::max(hi, H[i]);
  }
  CHECK(worst < 0.1);
  // Discrete maximum principle: extremes come from the data just outside.
  CHECK(lo >= 1.0 - 0.2);
  CHECK(hi <= 4.0 + 0.2);
  auto lap = discrete_laplacian(H);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (shell[i] && lap.active(i)) CHECK(std::abs(lap[i]) * g.h * g.h < 1e-7);

  auto c = ScalarField(g, 2.5);
  auto Hc = harmonic_replacement(c, shell);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (shell[i]) CHECK(Hc[i] == doctest::Approx(2.5).epsilon(1e-9));

  auto harm = ScalarField::sample(g, [](const Point& p) { return p.x * p.y; });
  auto Hh = harmonic_replacement(harm, shell);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (shell[i]) CHECK(std::abs(Hh[i] - harm[i]) < 1e-8);
}

TEST_CASE("field round trip") {
  Grid g = box_grid(0.5, 0.25);
  auto f = ScalarField::sample(g, [](const Point& p) { return p.x - 2 * p.y; });
  f[0] = -std::numeric_limits<double>::infinity();
  f.set_active(3, false);
  std::stringstream ss;
  write_field(ss, f);
  auto back = read_field(ss);
  REQUIRE(back.size() == f.size());
  CHECK(back[0] == f[0]);
  CHECK_FALSE(back.active(3));
  for (std::size_t i = 4; i < f.size(); ++i) CHECK(back[i] == f[i]);
}
