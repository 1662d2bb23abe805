#include "potkit/testfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "potkit/errors.hpp"
#include "potkit/potentials.hpp"

namespace potkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ClassName {
  TestClass cls;
  const char* name;
};

constexpr ClassName kNames[] = {
    {TestClass::sbh0, "sbh0"},
    {TestClass::sbh0_plus, "sbh0+"},
    {TestClass::sbh00_plus, "sbh00+"},
    {TestClass::sbh00_r, "sbh00(r)"},
    {TestClass::sbh_plus0_r, "sbh+0(r)"},
    {TestClass::sbh_plus0_circ_r, "sbh+0(or)"},
    {TestClass::JP, "JP"},
    {TestClass::JP1, "JP1"},
    {TestClass::ASP, "ASP"},
    {TestClass::ASP1, "ASP1"},
    {TestClass::Omega, "Omega"},
    {TestClass::G, "G"},
    {TestClass::J, "J"},
    {TestClass::AS, "AS"},
};

std::string point_str(const Point& p) {
  std::ostringstream os;
  os << "(" << p.x << ", " << p.y << ", " << p.z << ")";
  return os.str();
}

}  // namespace

void GluingConfig::validate() const {
  if (S_o.empty()) fail(ErrorKind::precondition, "S_o is empty");
  if (S_o.dim() != domain.dim()) fail(ErrorKind::precondition, "S_o and D have different dimensions");
  if (!S_o.interior_contains(o)) fail(ErrorKind::precondition, "o must be an interior point of S_o");
  if (!(b_minus < 0.0 && 0.0 < b_plus) || !std::isfinite(b_minus) || !std::isfinite(b_plus))
    fail(ErrorKind::precondition, "constants must satisfy -inf < b- < 0 < b+ < inf");
  if (!(r > 0.0)) fail(ErrorKind::precondition, "r must be positive");
  double sep = separation(S_o, domain);
  for (const auto& b : S_o.balls())
    if (domain.signed_distance(b.center) > -b.radius) fail(ErrorKind::precondition, "S_o is not inside D");
  if (!(4.0 * r < sep)) {
    std::ostringstream os;
    os << "4r = " << 4.0 * r << " is not below dist(S_o, dD) = " << sep;
    fail(ErrorKind::precondition, os.str());
  }
}

Grid gluing_grid(const GluingConfig& cfg, double h) {
  if (!(h > 0.0)) fail(ErrorKind::precondition, "grid spacing must be positive");
  Box b = cfg.domain.bounding_box();
  for (int a = 0; a < cfg.dim(); ++a)
    if (!std::isfinite(b.lo[a]) || !std::isfinite(b.hi[a]))
      fail(ErrorKind::precondition, "gluing needs a bounded domain");
  return Grid::covering(b.inflated(4.0 * h, cfg.dim()), h, cfg.dim());
}

const char* to_string(TestClass c) {
  for (const auto& n : kNames)
    if (n.cls == c) return n.name;
  return "?";
}

TestClass test_class_from_string(const std::string& s) {
  for (const auto& n : kNames)
    if (s == n.name) return n.cls;
  fail(ErrorKind::usage, "unknown test class '" + s + "'");
}

std::vector<TestClass> all_test_classes() {
  std::vector<TestClass> out;
  for (const auto& n : kNames) out.push_back(n.cls);
  return out;
}

bool is_potential_class(TestClass c) {
  return c == TestClass::JP || c == TestClass::JP1 || c == TestClass::ASP || c == TestClass::ASP1 ||
         c == TestClass::G;
}

bool is_measure_class(TestClass c) { return c == TestClass::Omega || c == TestClass::J || c == TestClass::AS; }

ScalarField sample_test_function(const TestFunction& v, const GluingConfig& cfg, const Grid& grid, bool punctured) {
  if (!v.eval) fail(ErrorKind::precondition, "test function '" + v.id + "' has no evaluator");
  ScalarField f(grid, 0.0, false);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Point p = grid.point(i);
    if (punctured ? p == cfg.o : cfg.shell_distance(p) <= 0.0) continue;
    double val = cfg.domain.contains(p) ? v.eval(p) : 0.0;
    if (!std::isfinite(val)) continue;
    f[i] = val;
    f.set_active(i, true);
  }
  return f;
}

MembershipReport verify_membership(const TestFunction& v, TestClass cls, const GluingConfig& cfg, const Grid& grid,
                                   const MembershipOptions& opts) {
  MembershipReport rep;
  const double h = grid.h;
  const Domain& D = cfg.domain;

  if (is_measure_class(cls)) {
    if (!v.measure) {
      rep.reason = "member carries no measure";
      return rep;
    }
    const auto& mu = *v.measure;
    if (!mu.is_positive() || std::abs(mu.total_mass() - 1.0) > 1e-9) {
      rep.reason = "not a probability measure";
      return rep;
    }
    // Omega and smooth members must avoid S_o; all must stay in D.
    const bool off_S = cls == TestClass::Omega || v.smooth;
    for (const auto& p : mu.support_points()) {
      if (!D.contains(p) || (off_S && cfg.shell_distance(p) <= 0.0)) {
        rep.reason = "support leaves the region at " + point_str(p);
        return rep;
      }
    }
    JensenOptions jo;
    jo.variant = cls == TestClass::AS ? MeasureVariant::arens_singer : MeasureVariant::jensen;
    auto jr = jensen_measure_check(mu, cfg.o, D, jo);
    if (!jr.passed) {
      rep.reason = std::string("fails the ") + (cls == TestClass::AS ? "Arens-Singer" : "Jensen") +
                   " check (probe " + jr.worst_probe + ")";
      return rep;
    }
    rep.passed = true;
    return rep;
  }

  if (is_potential_class(cls)) {
    ScalarField f = sample_test_function(v, cfg, grid, true);
    ClassifyOptions co;
    co.pole.near_pole = v.eval;
    auto c = classify_potential(f, D, cfg.o, co);
    rep.sup = c.band_max;
    rep.band_min = c.min_value;
    rep.subharmonic_violations = c.subharmonic_violations;
    bool ok = false;
    switch (cls) {
      case TestClass::JP:
        ok = c.cls == PotentialClass::JP || c.cls == PotentialClass::JP1;
        break;
      case TestClass::JP1:
      case TestClass::G:
        ok = c.cls == PotentialClass::JP1;
        break;
      case TestClass::ASP:
        ok = c.cls != PotentialClass::none;
        break;
      case TestClass::ASP1:
        ok = c.cls == PotentialClass::ASP1 || c.cls == PotentialClass::JP1;
        break;
      default:
        break;
    }
    rep.passed = ok;
    if (!ok) rep.reason = c.reason.empty() ? std::string("classified as ") + to_string(c.cls) : c.reason;
    return rep;
  }

  const double btol = opts.bound_tol * std::max(1.0, cfg.b_plus);
  const bool positive = cls == TestClass::sbh0_plus || cls == TestClass::sbh00_plus;
  const bool vanish_near = cls == TestClass::sbh00_plus || cls == TestClass::sbh00_r;
  const bool plus_near = cls == TestClass::sbh_plus0_r || cls == TestClass::sbh_plus0_circ_r;
  const bool band_floor = cls == TestClass::sbh00_r || cls == TestClass::sbh_plus0_r;
  const bool circ_floor = cls == TestClass::sbh_plus0_circ_r;

  // Restrict to D \ S_o for the subharmonicity test.
  ScalarField f = sample_test_function(v, cfg, grid);
  ScalarField inside = f;
  rep.sup = -kInf;
  rep.band_min = kInf;
  rep.circ_min = kInf;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!f.active(i)) continue;
    Point p = grid.point(i);
    double sd = D.signed_distance(p);
    if (!(sd < 0.0)) {
      inside.set_active(i, false);
      continue;
    }
    double val = f[i];
    double ds = cfg.shell_distance(p);
    rep.sup = std::max(rep.sup, val);
    if (positive && val < -btol) {
      rep.reason = "negative value " + std::to_string(val) + " at " + point_str(p);
      return rep;
    }
    if (sd > -3.0 * h) {
      if (vanish_near && std::abs(val) > btol) {
        rep.reason = "does not vanish near the boundary at " + point_str(p);
        return rep;
      }
      if (plus_near && val < -btol) {
        rep.reason = "negative near the boundary at " + point_str(p);
        return rep;
      }
    }
    if (ds < 4.0 * cfg.r) rep.band_min = std::min(rep.band_min, val);
    if (circ_floor && ds >= 2.0 * cfg.r && ds < 3.0 * cfg.r) {
      double m = spherical_mean(v.eval, cfg.dim(), p, cfg.r, opts.sphere_points);
      rep.circ_min = std::min(rep.circ_min, m);
    }
  }
  if (rep.sup > cfg.b_plus + btol) {
    rep.reason = "exceeds b+ (sup " + std::to_string(rep.sup) + ")";
    return rep;
  }
  if (band_floor && rep.band_min < cfg.b_minus - btol) {
    rep.reason = "falls below b- on the band (min " + std::to_string(rep.band_min) + ")";
    return rep;
  }
  if (circ_floor && rep.circ_min < cfg.b_minus - opts.mean_tol) {
    rep.reason = "spherical mean falls below b- (min " + std::to_string(rep.circ_min) + ")";
    return rep;
  }
  // Boundary values: limits at dD are read off at exact boundary points.
  for (const auto& q : D.boundary_sample(256.0)) {
    double val = v.eval(q);
    if (std::abs(val) > btol) {
      rep.reason = "does not vanish at the boundary point " + point_str(q);
      return rep;
    }
  }
  std::vector<double> radii = opts.radii.empty() ? std::vector<double>{2 * h, 4 * h} : opts.radii;
  auto sub = subharmonicity_test(inside, radii);
  rep.subharmonic_violations = sub.violations;
  if (sub.violations > 0) {
    rep.reason = "sub-mean inequality fails at " + point_str(sub.worst_point);
    return rep;
  }
  rep.passed = true;
  return rep;
}

}  // namespace potkit
