// Acceptance suite. One PASS/FAIL line per criterion; pass criterion numbers
// as arguments to run a subset. Exit status 1 if any selected criterion fails.
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "potkit/balayage.hpp"
#include "potkit/errors.hpp"
#include "potkit/gluing.hpp"
#include "potkit/green.hpp"
#include "potkit/kernels.hpp"
#include "potkit/measures.hpp"
#include "potkit/potentials.hpp"
#include "potkit/rng.hpp"
#include "potkit/serialize.hpp"
#include "potkit/zeros.hpp"

using namespace potkit;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  std::vector<std::string> notes;  // supplementary diagnostics, printed after the verdict
};

double uniform(Rng& g, double a, double b) { return a + (b - a) * uniform01(g); }

Point in_annulus(Rng& g, double a, double b) {
  double t = uniform(g, 0.0, 2.0 * M_PI);
  double r = std::sqrt(uniform(g, a * a, b * b));
  return {r * std::cos(t), r * std::sin(t)};
}

GluingConfig disc_config(double s, double r, double bm, double bp) {
  GluingConfig cfg;
  cfg.domain = Domain::ball(2, {0, 0}, 1.0);
  cfg.S_o = CompactSet::ball(2, {0, 0}, s);
  cfg.o = {0, 0};
  cfg.r = r;
  cfg.b_minus = bm;
  cfg.b_plus = bp;
  return cfg;
}

// Zeros in |z| < rmax, pairwise at least sep apart and off the circle |z| = avoid.
std::vector<ZeroPoint> separated_zeros(Rng& g, int n, double rmax, double sep, double avoid = -1.0) {
  std::vector<ZeroPoint> z;
  while (static_cast<int>(z.size()) < n) {
    Point p = in_annulus(g, 0.05, rmax);
    if (avoid > 0 && std::abs(norm(p) - avoid) < 0.05) continue;
    bool ok = true;
    for (const auto& q : z) ok = ok && distance(p, q.point) >= sep;
    if (ok) z.push_back({p, 1});
  }
  return z;
}

// 1. Kernels and constants ---------------------------------------------------
Outcome kernels() {
  Rng g(derive_seed(101, 0));
  std::size_t bad = 0;
  for (int i = 0; i < 10000; ++i) {
    double q = uniform(g, -3.0, 3.0);
    if (i % 10 == 0) q = 0.0;
    double t1 = std::exp(uniform(g, -6.0, 3.0)), t2 = std::exp(uniform(g, -6.0, 3.0));
    if (t1 > t2) std::swap(t1, t2);
    if (!(k_q(q, t1) <= k_q(q, t2))) ++bad;
  }
  bool consts = riesz_constant(2) == 1.0 / (2.0 * M_PI) && riesz_constant(3) == 1.0 / (4.0 * M_PI) &&
                ball_volume(0) == 1.0 && ball_volume(1) == 2.0 && ball_volume(2) == M_PI;
  return {bad == 0 && consts, fmt::format("monotonicity violations {}/10000, constants {}", bad, consts ? "exact" : "off")};
}

// 2. Walk-on-spheres Green's function ----------------------------------------
// With the pole at the centre the boundary data K(., 0) vanishes on the circle,
// so the estimator has zero variance; errors are compared against 3 se plus a
// rounding floor. An off-centre pole exercises the sampling error.
Outcome green_oracle() {
  const Domain disc = Domain::ball(2, {0, 0}, 1.0);
  bool ok = true;
  double worst_z = 0.0, worst_rel = 0.0;
  auto run = [&](const Point& o, const std::vector<Point>& xs) {
    GreenSpec spec{disc, o, GreenMethod::walk_on_spheres};
    spec.wos.samples = 100000;
    spec.wos.seed = 7;
    for (const auto& x : xs) {
      auto e = green_estimate(spec, x);
      double exact = green_closed_form(disc, o, x);
      double err = std::abs(e.value - exact);
      double floor = 1e-12 * std::max(1.0, exact);
      worst_z = std::max(worst_z, err / std::max(e.std_error, floor));
      worst_rel = std::max(worst_rel, err / exact);
      ok = ok && err <= 3.0 * e.std_error + floor && err < 0.02 * exact;
    }
  };
  std::vector<Point> xs;
  int i = 0;
  for (double r : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    xs.push_back({r * std::cos(0.7 * i), r * std::sin(0.7 * i)});
    ++i;
  }
  run({0, 0}, xs);
  for (auto& x : xs) x = x + Point(0.02, -0.03);
  double z0 = worst_z, rel0 = worst_rel;
  run({0.4, 0.2}, xs);
  bool outside = true;
  GreenSpec spec{disc, {0, 0}, GreenMethod::walk_on_spheres};
  for (Point x : {Point(1.5, 0), Point(0, -2), Point(3, 3), Point(1, 0)}) outside = outside && green(spec, x) == 0.0;
  return {ok && outside, fmt::format("pole 0: worst |err|/se {:.3f}, rel {:.2e}; pole (0.4,0.2): worst |err|/se "
                                     "{:.3f}, rel {:.4f}; zero outside {}",
                                     z0, rel0, worst_z, worst_rel, outside)};
}

// 3. Poisson-Jensen residual ---------------------------------------------------
Outcome poisson_jensen() {
  Rng g(derive_seed(103, 0));
  const double R = 0.8;
  auto mu = ball_harmonic_measure(2, {0, 0}, R, {0, 0}, 4096);
  auto analytic = [R](const Point& y) { return std::log(std::max(norm(y), R)) - std::log(norm(y)); };
  double worst_a = 0.0, worst_q = 0.0;
  for (int k = 0; k < 20; ++k) {
    auto zs = separated_zeros(g, 3, 1.4, 0.02, R);
    double lead = uniform(g, 0.5, 2.0);
    auto u = [zs, lead](const Point& p) {
      double s = std::log(lead);
      for (const auto& z : zs) s += std::log(distance(p, z.point));
      return s;
    };
    auto riesz = counting_measure(2, zs);
    worst_a = std::max(worst_a, poisson_jensen_check(u, riesz, mu, {0, 0}, analytic).residual);
    worst_q = std::max(worst_q, poisson_jensen_check(u, riesz, mu, {0, 0}).residual);
  }
  return {worst_a < 1e-3 && worst_q < 1e-2,
          fmt::format("max residual analytic {:.3e} (< 1e-3), quadrature {:.3e} (< 1e-2)", worst_a, worst_q)};
}

// 4. Poincare-Lelong -------------------------------------------------------------
Outcome poincare_lelong() {
  Rng g(derive_seed(104, 0));
  double worst = 0.0;
  bool ok = true;
  for (int deg = 1; deg <= 5; ++deg)
    for (int rep = 0; rep < 2; ++rep) {
      auto zs = separated_zeros(g, deg, 0.8, 0.15);
      std::vector<ZeroPoint> roots;
      int left = deg;
      for (auto& z : zs) {
        if (left <= 0) break;
        int m = (rep == 1 && left >= 2 && z.point.x > 0) ? 2 : 1;
        roots.push_back({z.point, m});
        left -= m;
      }
      auto f = HoloFunction::from_roots(roots);
      auto r = poincare_lelong_check(f, {{-1, -1, 0}, {1, 1, 0}}, 1.0 / 256);
      ok = ok && static_cast<int>(r.zeros.size()) == static_cast<int>(roots.size());
      worst = std::max(worst, r.max_relative_error);
    }
  return {ok && worst < 0.05, fmt::format("10 products up to degree 5, worst relative mass error {:.4f}", worst)};
}

// 5. Duality round trip ----------------------------------------------------------
Outcome duality() {
  Rng g(derive_seed(105, 0));
  Grid big = Grid::covering({{-3, -3}, {3, 3}}, 1.0 / 32, 2);
  double worst_mass = 0.0, worst_dirac = 0.0;
  for (int k = 0; k < 10; ++k) {
    double w[3], s = 0.0;
    for (double& x : w) s += (x = uniform(g, 0.1, 1.0));
    std::vector<Atom> atoms;
    for (double x : w) atoms.push_back({in_annulus(g, 0.3, 0.7), x / s});
    auto mu = DiscreteMeasure::from_atoms(2, atoms);
    auto P = duality_forward(mu, {0, 0});
    DualityOptions o;
    o.pole.near_pole = P.as_function();
    auto back = duality_inverse(P.sample(big), {0, 0}, o);
    worst_mass = std::max(worst_mass, std::abs(back.measure.total_mass() - 1.0));
    worst_dirac = std::max(worst_dirac, std::abs(back.dirac_coefficient));
  }
  Grid gg = Grid::covering({{-1.25, -1.25}, {1.25, 1.25}}, 1.0 / 64, 2);
  GreenFunction gd({Domain::ball(2, {0, 0}, 1.0), {0, 0}});
  DualityOptions o;
  o.pole.near_pole = gd.as_function();
  auto res = duality_inverse(gd.sample(gg), {0, 0}, o);
  auto ring = restrict_measure(res.measure, [&](const Point& p) { return std::abs(norm(p) - 1.0) <= 3 * gg.h; });
  double ring_mass = ring.total_mass(), total = res.measure.total_mass();
  bool ok = worst_mass <= 0.02 && worst_dirac <= 0.05 && std::abs(total - 1.0) <= 0.02 &&
            std::abs(ring_mass - 1.0) <= 0.02 && std::abs(res.dirac_coefficient) <= 0.05;
  return {ok, fmt::format("3-atom: worst mass err {:.4f}, worst dirac {:.4f}; g_disc: mass {:.4f} ({:.4f} within 3h "
                          "of the circle), dirac {:.4f}",
                          worst_mass, worst_dirac, total, ring_mass, res.dirac_coefficient)};
}

// 6. Gluing certificates -----------------------------------------------------------
Outcome gluing() {
  Rng g(derive_seed(106, 0));
  int passed = 0;
  std::size_t violations = 0;
  std::string first;
  for (int k = 0; k < 20; ++k) {
    double s = uniform(g, 0.03, 0.15), r = uniform(g, 0.03, 0.06);
    auto cfg = disc_config(s, r, -uniform(g, 0.5, 2.0), uniform(g, 0.5, 2.0));
    TestClass cls = k % 2 == 0 ? TestClass::sbh_plus0_circ_r : TestClass::sbh0_plus;
    FamilyOptions fo;
    fo.h = 1.0 / 64;
    auto F = generate_family(cls, cfg, 1, derive_seed(106, k + 1), fo);
    GluingOptions opts;
    Grid grid = gluing_grid(cfg, opts.h);
    auto f = sample_test_function(F.members[0], cfg, grid);
    auto gg = glue_with_green(f, cfg, opts);
    bool ok = gg.certificate.passed();
    for (const char* id : {"h", "=", "+", "0+", "o"}) ok = ok && gg.certificate.find(id) != nullptr;
    violations += gg.certificate.subharmonicity.violations;
    if (ok) ++passed;
    else if (first.empty())
      for (const auto& c : gg.certificate.clauses)
        if (!c.passed) first = fmt::format("config {} clause {} margin {:.3e}", k, c.id, c.worst_margin);
  }
  // B depends on the configuration only.
  auto cfg = disc_config(0.1, 0.05, -1.0, 1.0);
  FamilyOptions fo;
  fo.h = 1.0 / 64;
  auto F = generate_family(TestClass::sbh_plus0_circ_r, cfg, 5, 61, fo);
  std::vector<double> Bs;
  for (const auto& v : F.members) Bs.push_back(glue_test_function(v, cfg).B);
  bool same = true;
  for (double b : Bs) same = same && b == Bs[0];
  bool ok = passed == 20 && violations == 0 && same;
  return {ok, fmt::format("{}/20 certificates, {} subharmonicity violations, B = {:.17g} over 5 members ({}){}", passed,
                          violations, Bs[0], same ? "identical" : "differs", first.empty() ? "" : "; " + first)};
}

// 7. Approximation sequence --------------------------------------------------------
Outcome approx() {
  auto cfg = disc_config(0.05, 0.05, -1.0, 1.0);
  FamilyOptions fo;
  fo.h = 1.0 / 64;
  auto F = generate_family(TestClass::sbh_plus0_circ_r, cfg, 1, 71, fo);
  GluingOptions opts;
  auto seq = potential_approx_sequence(F.members[0], cfg, 9, opts);
  std::size_t bad = 0;
  for (auto b : seq.monotonicity_violations) bad += b;
  bool cls = true;
  for (const auto& c : seq.classes) cls = cls && (c == "ASP1" || c == "JP1");
  bool bound = seq.bound_margin >= 0.0;
  return {bad == 0 && cls && bound && seq.V.size() == 9,
          fmt::format("{} monotonicity violations over k = 1..8, classes {}, band bound margin {:.3e}", bad,
                      cls ? "ASP1/JP1" : "off-class", seq.bound_margin)};
}

// 8. Embedding and dominance ------------------------------------------------------
Outcome embedding() {
  auto cfg = disc_config(0.1, 0.05, -1.0, 1.0);
  EmbeddingOptions eo;
  eo.members_per_class = 4;
  eo.dominance_members = 64;
  FamilyOptions fo;
  fo.h = 1.0 / 64;
  auto rep = embedding_check(cfg, 81, eo, fo);
  std::size_t tested = 0, fails = 0;
  double excess = -INFINITY;
  for (const auto& d : rep.dominance) {
    tested += d.tested;
    fails += d.failures;
    excess = std::max(excess, d.worst_excess);
  }
  std::size_t inc = 0, inc_fail = 0;
  for (const auto& i : rep.inclusions) {
    inc += i.tested;
    inc_fail += i.failures;
  }
  return {rep.passed(), fmt::format("dominance {} members, {} failures, worst V - g_D {:.3e}; inclusions {} checks, {} "
                                    "failures",
                                    tested, fails, excess, inc, inc_fail)};
}

// 9. Forward consistency ------------------------------------------------------------
Outcome consistency() {
  Outcome out;
  auto cfg = disc_config(0.1, 0.05, -1.0, 1.0);
  Grid grid = gluing_grid(cfg, 1.0 / 64);
  Rng g(derive_seed(109, 0));
  ConsistencyOptions co;
  co.family_size = 4;
  co.family.h = 1.0 / 48;
  int good = 0;
  std::string first;
  for (int k = 0; k < 10; ++k) {
    double alpha = uniform(g, 0.2, 1.0), extra = uniform(g, 0.0, 0.5);
    double c1 = uniform(g, -0.5, 0.5), c2 = uniform(g, -0.5, 0.5), c3 = uniform(g, -0.5, 0.5);
    std::complex<double> a(0.0, 0.0);
    Point pa = in_annulus(g, 0.2, 0.7);
    a = {pa.x, pa.y};
    auto h = [=](const Point& p) { return c1 * (p.x * p.x - p.y * p.y) + c2 * p.x * p.y + c3 * p.x; };
    auto u = ScalarField::sample(grid, [=](const Point& p) {
      std::complex<double> z(p.x, p.y);
      return alpha * dot(p, p) + std::log(std::abs((z - a) / (1.0 - std::conj(a) * z)));
    });
    auto M = ScalarField::sample(grid, [=](const Point& p) { return (alpha + extra) * dot(p, p) + h(p); });
    auto H = ScalarField::sample(grid, h);
    co.seed = derive_seed(109, k + 1);
    auto rep = crit_consistency(consistency_input(u, M, H), cfg, co);
    bool ok = rep.witness != "none" && rep.witness != "invalid";
    for (const auto& s : rep.statements)
      if (s.verdict == "violated") {
        ok = false;
        if (first.empty()) first = fmt::format("triple {} statement {}", k, s.id);
      }
    good += ok;
  }

  // Counterexample pair.
  auto u = ScalarField::sample(grid, [](const Point& p) { return 2.0 * std::log(norm(p)); });
  auto M = ScalarField::sample(grid, [](const Point& p) { return std::log(norm(p)); });
  co.seed = 1;
  auto rep = crit_consistency(consistency_input(u, M, std::nullopt), cfg, co);
  const auto* s5 = rep.find("s5");
  double slope = s5 && s5->sweep ? s5->sweep->slope : NAN;
  bool div = slope > 0.5;
  out.pass = good == 10 && div;
  out.detail = fmt::format("witnessed triples {}/10 consistent{}; u = 2ln|z|, M = ln|z|: s5 sweep slope {:.3e} "
                           "(needs > 0.5)",
                           good, first.empty() ? "" : " (" + first + ")", slope);
  if (!div) {
    // 2ln|z| <= ln|z| on the unit disc, so h = 0 witnesses the pair and the
    // Riesz masses sit at o inside S_o. The sweep has nothing to detect.
    double gap = -INFINITY;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      Point p = grid.point(i);
      double n = norm(p);
      if (n > 0 && n < 1) gap = std::max(gap, 2.0 * std::log(n) - std::log(n));
    }
    out.notes.push_back(fmt::format("the pair satisfies u <= M on D (max u - M = {:.3e}), so h = 0 is a witness", gap));
    // Mass deficit outside S_o: counting measure of 1 - 1/k against nothing.
    DiscreteMeasure theta(2);
    for (int k = 2; k <= 10000; ++k) theta.add_atom({1.0 - 1.0 / k, 0.0}, 1.0);
    auto off = [&](const Point& p) { return cfg.shell_distance(p) > 0; };
    auto sw = green_sweep(theta, DiscreteMeasure(2), cfg, off);
    out.notes.push_back(fmt::format("non-Blaschke mass off S_o against mu = 0: sweep slope {:.3f}, {}", sw.slope,
                                    sw.diverging ? "divergent" : "bounded"));
  }
  return out;
}

// 10. Zero-set dichotomy ------------------------------------------------------------
Outcome zero_sets() {
  GluingConfig cfg = disc_config(0.25, 0.05, -1.0, 2.0);
  ZeroSet blaschke, slow;
  for (int k = 1; k <= 12; ++k) blaschke.zeros.push_back({{1.0 - std::ldexp(1.0, -k), 0.0}, 1});
  for (int k = 1; k <= 400; ++k) slow.zeros.push_back({{1.0 - 1.0 / k, 0.0}, 1});
  Crit3Options co;
  co.family_size = 8;
  co.family.h = 1.0 / 64;
  auto rep = crit3_roundtrip(blaschke, growth_zero(), cfg, co);
  bool z1 = rep.z1_feasible && std::exp(rep.z1_excess) <= 1.0 + 1e-6;
  double worst = std::max({rep.z2.max_margin, rep.z3.max_margin, rep.z4.max_margin});
  bool margins = rep.z2.consistent() && rep.z3.consistent() && rep.z4.consistent();

  FamilyOptions fo;
  fo.h = 1.0 / 64;
  auto F = generate_family(TestClass::sbh0_plus, cfg, 8, 5, fo);
  auto sw = zero_sweep(slow, {50, 100, 200, 400}, cfg, F);
  bool growth = sw.slope >= 0.9;
  return {z1 && margins && growth,
          fmt::format("Blaschke: max |f| = {:.9f}, z2-z4 max margin {:.4f} <= witness bound {:.4f} + tol ({}); "
                      "1 - 1/k: z3 margin slope {:.4f} per ln K (>= 0.9)",
                      std::exp(rep.z1_excess), worst, rep.bound, margins ? "consistent" : "violated", sw.slope)};
}

// 11. Determinism ---------------------------------------------------------------------
std::string reports(int threads) {
  Json j;
  GreenSpec spec{Domain::annulus(2, {0, 0}, 0.2, 1.0), {0.5, 0.1}, GreenMethod::walk_on_spheres};
  spec.wos.samples = 20000;
  spec.wos.seed = 11;
  spec.wos.threads = threads;
  j["green"] = estimate_json(green_estimate(spec, {-0.4, 0.3}));

  auto cfg = disc_config(0.1, 0.05, -1.0, 1.0);
  FamilyOptions fo;
  fo.h = 1.0 / 48;
  fo.threads = threads;
  auto F = generate_family(TestClass::sbh_plus0_r, cfg, 6, 13, fo);
  auto theta = sphere_measure(2, {0.2, 0.1}, 0.4, 64);
  auto mu = DiscreteMeasure::dirac(2, {0.2, 0.1});
  MarginOptions mo;
  mo.threads = threads;
  j["margins"] = margin_json(affine_margin(theta, mu, F, {}, mo));

  JensenOptions jo;
  jo.probe_count = 16;
  j["jensen"] = jensen_json(jensen_measure_check(sphere_measure(2, {0, 0}, 0.5, 256), {0, 0}, cfg.domain, jo));

  GluingConfig zc = disc_config(0.25, 0.05, -1.0, 2.0);
  ZeroSet Z;
  for (int k = 1; k <= 8; ++k) Z.zeros.push_back({{1.0 - std::ldexp(1.0, -k), 0.0}, 1});
  Crit3Options co;
  co.family_size = 3;
  co.family.h = 1.0 / 48;
  co.family.threads = threads;
  j["crit3"] = crit3_json(crit3_roundtrip(Z, growth_zero(), zc, co));
  return dump(j);
}

Outcome determinism() {
  std::string base = reports(1);
  int same = 0, runs = 0;
  for (int t : {1, 3, 8, 3}) {
    ++runs;
    same += reports(t) == base;
  }
  return {same == runs, fmt::format("{}/{} runs byte-identical to the single-thread report ({} bytes; threads 1, 3, "
                                    "8, 3)",
                                    same, runs, base.size())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::function<Outcome()>> criteria{
      {1, kernels},     {2, green_oracle}, {3, poisson_jensen}, {4, poincare_lelong},
      {5, duality},     {6, gluing},       {7, approx},         {8, embedding},
      {9, consistency}, {10, zero_sets},   {11, determinism}};
  std::vector<int> pick;
  for (int i = 1; i < argc; ++i) {
    char* end = nullptr;
    long n = std::strtol(argv[i], &end, 10);
    if (*end != '\0' || !criteria.count(static_cast<int>(n))) {
      std::fprintf(stderr, "usage: %s [criterion 1..11]...\n", argv[0]);
      return 2;
    }
    pick.push_back(static_cast<int>(n));
  }
  if (pick.empty())
    for (const auto& [n, f] : criteria) pick.push_back(n);

  bool all = true;
  for (int n : pick) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria.at(n)();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d: %s  %s [%.1fs]\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    for (const auto& note : o.notes) std::printf("              note: %s\n", note.c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
