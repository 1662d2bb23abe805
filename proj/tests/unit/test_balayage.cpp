#include <cmath>
#include <complex>

#include "doctest.h"
#include "potkit/balayage.hpp"
#include "potkit/errors.hpp"
#include "potkit/green.hpp"
#include "potkit/kernels.hpp"
#include "potkit/potentials.hpp"

using namespace potkit;

namespace {

GluingConfig disc_config() {
  GluingConfig cfg;
  cfg.domain = Domain::ball(2, {0, 0}, 1.0);
  cfg.S_o = CompactSet::ball(2, {0, 0}, 0.1);
  cfg.o = {0, 0};
  cfg.r = 0.05;
  return cfg;
}

FamilyOptions quick() {
  FamilyOptions fo;
  fo.h = 1.0 / 48;
  return fo;
}

}  // namespace

TEST_CASE("radial bump potential against quadrature") {
  for (int d : {2, 3}) {
    RadialBump rb(d, {0.1, 0.0, 0.0}, 0.3, 0.6);
    Box box{{-0.6, -0.6, d == 3 ? -0.6 : 0.0}, {0.8, 0.6, d == 3 ? 0.6 : 0.0}};
    auto mu = density_measure(d, [&](const Point& x) { return rb.density(x); }, box, d == 2 ? 0.004 : 0.015);
    for (Point y : {Point(0.1, 0.1), Point(0.55, 0.0), Point(1.2, 0.4), Point(-0.2, 0.1)}) {
      double direct = integrate([&](const Point& x) { return kernel_K(d, x, y); }, mu);
      INFO("d = " << d << " y = " << y.x << "," << y.y);
      CHECK(rb.potential(y) == doctest::Approx(direct).epsilon(d == 2 ? 2e-3 : 1e-2));
    }
    CHECK(rb.green_like({1.0, 0.0}) == 0.0);
    CHECK(rb.green_like({0.2, 0.0}) > 0.0);
  }
}

TEST_CASE("families verify and regenerate deterministically") {
  auto cfg = disc_config();
  auto fo = quick();
  for (TestClass tag : all_test_classes()) {
    for (bool smooth : {false, true}) {
      fo.smooth = smooth;
      INFO(to_string(tag) << (smooth ? "~" : ""));
      auto F = generate_family(tag, cfg, 3, 11, fo);
      REQUIRE(F.members.size() == 3);
      for (const auto& m : F.members) {
        if (is_measure_class(tag)) CHECK(m.measure.has_value());
        else CHECK(static_cast<bool>(m.eval));
      }
      auto again = generate_family(tag, cfg, 3, 11, fo);
      for (std::size_t i = 0; i < 3; ++i) CHECK(F.members[i].params == again.members[i].params);
    }
  }
}

TEST_CASE("Arens-Singer members include non-Jensen ones") {
  auto cfg = disc_config();
  auto F = generate_family(TestClass::ASP1, cfg, 6, 3, quick());
  bool negative = false;
  Grid g = gluing_grid(cfg, 1.0 / 64);
  for (const auto& m : F.members)
    for (std::size_t i = 0; i < g.size(); ++i)
      if (m.eval(g.point(i)) < -1e-6) negative = true;
  CHECK(negative);
  // Swept-atom measures carry an atom at q, so the probe K(., q) integrates to
  // -inf < K(o, q): they are Arens-Singer but not Jensen.
  auto J = generate_family(TestClass::AS, cfg, 8, 3, quick());
  int swept = 0;
  for (const auto& m : J.members) {
    if (m.kind != "swept_atom") continue;
    ++swept;
    Point q(m.params[4], m.params[5], m.params[6]);
    double iv = integrate([&](const Point& x) { return kernel_K(2, x, q); }, *m.measure);
    CHECK(iv < kernel_K(2, cfg.o, q));
  }
  CHECK(swept > 0);
}

TEST_CASE("affine margins") {
  auto cfg = disc_config();
  auto F = generate_family(TestClass::G, cfg, 4, 5, quick());
  auto theta = DiscreteMeasure::dirac(2, {0.5, 0.0});
  auto zero = DiscreteMeasure(2);
  auto same = affine_margin(theta, theta, F);
  CHECK(same.max_margin == 0.0);
  CHECK(same.consistent());

  auto rep = affine_margin(theta, zero, F);
  double expect = 0;
  for (const auto& m : F.members) expect = std::max(expect, m.eval({0.5, 0.0}));
  CHECK(rep.max_margin == doctest::Approx(expect));
  CHECK(rep.consistent());
  MarginOptions lin;
  lin.linear = true;
  CHECK(!affine_margin(theta, zero, F, {}, lin).consistent());

  // An atom at the pole is infinite for every member unless the region drops it.
  auto pole = DiscreteMeasure::dirac(2, {0, 0});
  CHECK(!affine_margin(pole, zero, F).consistent());
  auto off = [&](const Point& p) { return cfg.shell_distance(p) > 0; };
  CHECK(affine_margin(pole, zero, F, off).max_margin == 0.0);
}

TEST_CASE("green sweep detects non-Blaschke mass") {
  auto cfg = disc_config();
  DiscreteMeasure heavy(2), light(2);
  for (int k = 1; k <= 20; ++k) {
    double r = 1.0 - std::pow(2.0, -k);
    heavy.add_atom({r, 0.0}, std::pow(2.0, k));
    light.add_atom({r, 0.0}, 1.0);
  }
  auto off = [&](const Point& p) { return cfg.shell_distance(p) > 0; };
  auto zero = DiscreteMeasure(2);
  auto h = green_sweep(heavy, zero, cfg, off);
  CHECK(h.slope > 0.5);
  CHECK(h.diverging);
  auto l = green_sweep(light, zero, cfg, off);
  CHECK(l.slope < 0.5);
  CHECK(!l.diverging);
}

TEST_CASE("crit_consistency") {
  auto cfg = disc_config();
  Grid g = gluing_grid(cfg, 1.0 / 64);
  auto q = [](const Point& p) { return 0.5 * dot(p, p); };
  auto hfun = [](const Point& p) { return p.x * p.x - p.y * p.y + 0.3 * p.x; };
  // u = q + log|b_a| with a Blaschke factor, so u + h <= M = q + h.
  const std::complex<double> a(0.4, 0.2);
  auto u = ScalarField::sample(g, [&](const Point& p) {
    std::complex<double> z(p.x, p.y);
    return q(p) + std::log(std::abs((z - a) / (1.0 - std::conj(a) * z)));
  });
  auto M = ScalarField::sample(g, [&](const Point& p) { return q(p) + hfun(p); });
  auto h = ScalarField::sample(g, hfun);
  ConsistencyOptions co;
  co.family_size = 3;
  co.family = quick();
  auto rep = crit_consistency(consistency_input(u, M, h), cfg, co);
  CHECK(rep.witness == "harmonic");
  CHECK(rep.findings.empty());
  for (const auto& s : rep.statements) {
    INFO(s.id << " " << s.verdict << " " << s.margins.max_margin);
    CHECK(s.verdict != "violated");
    CHECK(s.implied);
  }
  auto csv = consistency_csv(rep);
  CHECK(csv.find("h8") != std::string::npos);

  // Without a witness nothing is implied.
  auto rep2 = crit_consistency(consistency_input(u, u, std::nullopt), cfg, co);
  CHECK(rep2.witness == "none");
  CHECK(!rep2.any_violated());
}

TEST_CASE("embedding check") {
  auto cfg = disc_config();
  EmbeddingOptions eo;
  eo.members_per_class = 2;
  eo.dominance_members = 4;
  auto rep = embedding_check(cfg, 9, eo, quick());
  for (const auto& i : rep.inclusions) {
    INFO(to_string(i.from) << " -> " << to_string(i.to) << ": " << i.first_failure);
    CHECK(i.failures == 0);
  }
  REQUIRE(rep.dominance.size() == 2);
  for (const auto& d : rep.dominance) {
    INFO(to_string(d.cls) << ": " << d.first_failure);
    CHECK(d.failures == 0);
    CHECK(d.worst_excess <= rep.tol);
  }
  // g_D on the band peaks on dS_o: B' = ln(1 / 0.1).
  CHECK(rep.dominance[0].B_prime == doctest::Approx(std::log(10.0)).epsilon(1e-9));
  CHECK(rep.dominance[0].band_min >= 0.0);
  CHECK(std::isfinite(rep.dominance[1].B_second));
  CHECK(rep.dominance[1].band_min >= rep.dominance[1].B_second);
  CHECK(rep.passed());
}
