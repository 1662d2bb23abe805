#include "potkit/balayage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "potkit/errors.hpp"
#include "potkit/gluing.hpp"
#include "potkit/green.hpp"
#include "potkit/kernels.hpp"
#include "potkit/parallel.hpp"
#include "potkit/potentials.hpp"
#include "potkit/quadrature.hpp"
#include "potkit/rng.hpp"

namespace potkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double bump(double s) { return std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0; }

// Convex, increasing, C^inf, zero on (-inf, 0]: the primitive of exp(-1/s).
double smooth_ramp(double x) {
  if (x <= 0.0) return 0.0;
  return x * std::exp(-1.0 / x) + std::expint(-1.0 / x);
}

const GaussRule& rule64() {
  static const GaussRule r = gauss_legendre(64);
  return r;
}

template <class F>
double gauss(F&& f, double a, double b) {
  const auto& r = rule64();
  double m = 0.5 * (a + b), w = 0.5 * (b - a), s = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * f(m + w * r.nodes[i]);
  return s * w;
}

struct Ctx {
  const GluingConfig& cfg;
  const FamilyOptions& opts;
  int d;
  Point o;
  double rhoS;  // S_o c B(o, rhoS)
  double rin;   // B(o, rin) c S_o
  double RD;    // dist(o, dD)
  double hv;
  Grid grid;
};

Point random_direction(int d, Rng& g) {
  if (d == 1) return Point(uniform01(g) < 0.5 ? -1.0 : 1.0);
  if (d == 2) {
    double t = 2.0 * M_PI * uniform01(g);
    return Point(std::cos(t), std::sin(t));
  }
  std::normal_distribution<double> N;
  Point p(N(g), N(g), N(g));
  double n = norm(p);
  return n > 0 ? p / n : Point(1.0);
}

double lerp(double a, double b, double t) { return a + (b - a) * t; }

FieldFn ball_green(int d, const Point& c, double R, const Point& pole) {
  Domain B = Domain::ball(d, c, R);
  return [B, pole](const Point& p) { return green_closed_form(B, pole, p); };
}

// min over the sphere of P(., o) / P(., q) for the ball B(c, R).
double poisson_ratio(int d, const Point& c, double R, const Point& o, const Point& q) {
  auto wo = ball_harmonic_measure(d, c, R, o, 512);
  auto wq = ball_harmonic_measure(d, c, R, q, 512);
  const auto& ao = wo.positive().atoms;
  const auto& aq = wq.positive().atoms;
  double m = kInf;
  for (std::size_t j = 0; j < ao.size() && j < aq.size(); ++j) m = std::min(m, ao[j].mass / aq[j].mass);
  return m;
}

// Extrema of a test function over D \ S_o (sup) and over the 4r band (min).
struct Extrema {
  double sup = 0.0;
  double band_min = 0.0;
};

Extrema extrema(const FieldFn& f, const Ctx& c) {
  Extrema e;
  const auto& cfg = c.cfg;
  for (const auto& p : cfg.S_o.boundary_sample(512.0 / std::max(cfg.r, 1e-3))) {
    double v = f(p);
    if (!std::isfinite(v)) continue;
    e.sup = std::max(e.sup, v);
    e.band_min = std::min(e.band_min, v);
  }
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    Point p = c.grid.point(i);
    double ds = cfg.shell_distance(p);
    if (!(ds > 0.0) || !cfg.domain.contains(p)) continue;
    double v = f(p);
    if (!std::isfinite(v)) continue;
    e.sup = std::max(e.sup, v);
    if (ds < 4.0 * cfg.r) e.band_min = std::min(e.band_min, v);
  }
  return e;
}

// Scale so that sup = 0.9 b+, or less when the band floor b- binds.
double bound_scale(const Extrema& e, const GluingConfig& cfg, bool floor) {
  double s = kInf;
  if (e.sup > 0.0) s = std::min(s, cfg.b_plus / e.sup);
  if (floor && e.band_min < 0.0) s = std::min(s, cfg.b_minus / e.band_min);
  return 0.9 * (std::isfinite(s) ? s : 1.0);
}

TestFunction scaled(TestFunction t, double s) {
  FieldFn f = t.eval;
  t.eval = [f, s](const Point& p) { return s * f(p); };
  t.params.insert(t.params.begin(), s);
  t.pole_coefficient *= s;
  return t;
}

// Point q strictly inside S_o near o.
Point hidden_point(const Ctx& c, Rng& g) { return c.o + random_direction(c.d, g) * (0.7 * c.rin * uniform01(g)); }

// a g_B(., o) - eps g_B(., q) with B = B(center, R) and eps below the Poisson ratio.
TestFunction green_difference(const Ctx& c, const Point& center, double R, const Point& q, double frac) {
  double ratio = poisson_ratio(c.d, center, R, c.o, q);
  double eps = frac * ratio;
  FieldFn go = ball_green(c.d, center, R, c.o), gq = ball_green(c.d, center, R, q);
  TestFunction t;
  t.kind = "green_difference";
  t.params = {center.x, center.y, center.z, R, q.x, q.y, q.z, eps};
  t.eval = [go, gq, eps](const Point& p) { return go(p) - eps * gq(p); };
  t.pole_coefficient = 1.0;
  return t;
}

TestFunction green_member(const Ctx& c, const Point& center, double R) {
  TestFunction t;
  t.kind = "green";
  t.params = {center.x, center.y, center.z, R};
  t.eval = ball_green(c.d, center, R, c.o);
  t.pole_coefficient = 1.0;
  return t;
}

// max(g_B(., o) - level, 0), or its smooth convex version.
TestFunction cut_member(const Ctx& c, double R, double level, bool smooth) {
  FieldFn g = ball_green(c.d, c.o, R, c.o);
  TestFunction t;
  t.kind = smooth ? "smooth_cut" : "cut";
  t.params = {R, level};
  if (smooth)
    t.eval = [g, level](const Point& p) {
      double v = g(p);
      return std::isinf(v) ? kInf : smooth_ramp(v - level);
    };
  else
    t.eval = [g, level](const Point& p) { return std::max(g(p) - level, 0.0); };
  t.smooth = smooth;
  return t;
}

// Mixture of Green's functions of balls containing o, total pole mass 1.
TestFunction green_mixture(const Ctx& c, Rng& g) {
  int m = 1 + static_cast<int>(3 * uniform01(g));
  std::vector<FieldFn> parts;
  std::vector<double> w;
  TestFunction t;
  t.kind = "green_mixture";
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    Point center = c.o + random_direction(c.d, g) * (0.4 * c.RD * uniform01(g));
    double room = -c.cfg.domain.signed_distance(center) - 4.0 * c.hv;
    double lo = distance(center, c.o) + 0.1 * c.RD;
    if (!(room > lo)) continue;
    double R = lerp(lo, room, 0.2 + 0.8 * uniform01(g));
    parts.push_back(ball_green(c.d, center, R, c.o));
    w.push_back(0.2 + uniform01(g));
    total += w.back();
    t.params.insert(t.params.end(), {center.x, center.y, center.z, R});
  }
  if (parts.empty()) {
    parts.push_back(ball_green(c.d, c.o, 0.5 * c.RD, c.o));
    w.push_back(1.0);
    total = 1.0;
  }
  for (auto& x : w) x /= total;
  t.eval = [parts, w](const Point& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < parts.size(); ++i) s += w[i] * parts[i](p);
    return s;
  };
  t.pole_coefficient = 1.0;
  return t;
}

// Ring layout for the smooth signed constructions: mu_o on (ao, bo) about o,
// nu2 on (a2, b2) about c inside it, nu1 on (a1, b1) about c.
struct Rings {
  Point c;
  RadialBump mu_o, nu1, nu2;
  double eps = 0.0;
};

Rings smooth_rings(const Ctx& c, double L, double U, const Point& cpt, bool inner_ring) {
  Rings r;
  r.c = cpt;
  double w = U - L, delta = distance(cpt, c.o);
  r.mu_o = RadialBump(c.d, c.o, L + 0.3 * w, U);
  r.nu2 = RadialBump(c.d, cpt, L + 0.35 * w + delta, U - 0.05 * w - delta);
  if (inner_ring) r.nu1 = RadialBump(c.d, cpt, L + delta, L + 0.3 * w);
  // eps nu2 <= mu_o on the support of nu2.
  double m = kInf;
  const int nr = 48, na = c.d == 1 ? 2 : 64;
  for (int i = 1; i < nr; ++i) {
    double rho = lerp(r.nu2.inner(), r.nu2.outer(), static_cast<double>(i) / nr);
    for (int j = 0; j < na; ++j) {
      Point e;
      if (c.d == 1) e = Point(j == 0 ? -1.0 : 1.0);
      else if (c.d == 2) e = Point(std::cos(2 * M_PI * j / na), std::sin(2 * M_PI * j / na));
      else {
        double z = -1.0 + (2.0 * j + 1.0) / na, phi = j * M_PI * (3.0 - std::sqrt(5.0));
        double s = std::sqrt(1 - z * z);
        e = Point(s * std::cos(phi), s * std::sin(phi), z);
      }
      Point x = cpt + e * rho;
      double f2 = r.nu2.density(x);
      if (f2 > 0.0) m = std::min(m, r.mu_o.density(x) / f2);
    }
  }
  r.eps = std::isfinite(m) ? 0.9 * m : 0.0;
  return r;
}

// Inner radius for potentials harmonic near S_o^{4r}.
double harmonic_core(const Ctx& c) {
  double L = c.rhoS + 4.0 * c.cfg.r;
  return L + 0.1 * (c.RD - L);
}

TestFunction build_member(TestClass tag, bool smooth, const Ctx& c, Rng& g, int index) {
  const auto& cfg = c.cfg;
  const double span = c.RD - c.rhoS;
  const double Rin = c.RD - 4.0 * c.hv - 0.02 * c.RD;  // balls compactly inside D
  auto R_shell = [&](double hi) { return lerp(c.rhoS + 0.25 * span, hi, uniform01(g)); };
  TestFunction t;
  switch (tag) {
    case TestClass::G: {
      double R = !c.opts.radii.empty()
                     ? c.opts.radii[index % c.opts.radii.size()] * c.RD
                     : R_shell(Rin);
      t = green_member(c, c.o, R);
      break;
    }
    case TestClass::Omega:
    case TestClass::J:
    case TestClass::AS: {
      const int n = c.opts.measure_points;
      double u = uniform01(g);
      t.kind = "measure";
      if (smooth) {
        double L = c.rhoS + 0.1 * span, U = c.RD - 0.05 * span;
        if (tag == TestClass::AS && u < 0.7) {
          Point cpt = c.o + random_direction(c.d, g) * (0.04 * (U - L) * uniform01(g));
          Rings rg = smooth_rings(c, L, U, cpt, true);
          double eps = rg.eps * (0.5 + 0.5 * uniform01(g));
          Box box{c.o - Point(U, U, U), c.o + Point(U, U, U)};
          auto f = [rg, eps](const Point& x) {
            return std::max(0.0, rg.mu_o.density(x) + eps * (rg.nu1.density(x) - rg.nu2.density(x)));
          };
          t.measure = density_measure(c.d, f, box, (U - L) / 40.0);
          t.kind = "smooth_arens_singer";
          t.params = {cpt.x, cpt.y, cpt.z, eps};
        } else {
          double a = lerp(L, U, 0.4 * uniform01(g));
          double b = lerp(a, U, 0.5 + 0.5 * uniform01(g));
          RadialBump rb(c.d, c.o, a, b);
          Box box{c.o - Point(b, b, b), c.o + Point(b, b, b)};
          t.measure = density_measure(c.d, [rb](const Point& x) { return rb.density(x); }, box, (b - a) / 24.0);
          t.kind = "smooth_radial";
          t.params = {a, b};
        }
        t.smooth = true;
        break;
      }
      bool signed_as = tag == TestClass::AS && u < 0.6;
      if (signed_as) {
        Point cb = c.o + random_direction(c.d, g) * (0.2 * c.RD * uniform01(g));
        double room = -cfg.domain.signed_distance(cb) * 0.95;
        double R = lerp(distance(cb, c.o) + 0.3 * c.RD, room, uniform01(g));
        Point q = cb + random_direction(c.d, g) * (0.6 * R * uniform01(g));
        if (distance(q, c.o) < 0.05 * R) q = cb + (q - cb) * 0.5 + random_direction(c.d, g) * (0.1 * R);
        auto wo = ball_harmonic_measure(c.d, cb, R, c.o, n);
        auto wq = ball_harmonic_measure(c.d, cb, R, q, n);
        const auto& ao = wo.positive().atoms;
        const auto& aq = wq.positive().atoms;
        double ratio = kInf;
        for (std::size_t j = 0; j < ao.size(); ++j) ratio = std::min(ratio, ao[j].mass / aq[j].mass);
        double eps = ratio * (0.3 + 0.6 * uniform01(g));
        std::vector<Atom> atoms;
        for (std::size_t j = 0; j < ao.size(); ++j) atoms.push_back({ao[j].point, ao[j].mass - eps * aq[j].mass});
        atoms.push_back({q, eps});
        t.measure = DiscreteMeasure::from_atoms(c.d, atoms);
        t.kind = "swept_atom";
        t.params = {cb.x, cb.y, cb.z, R, q.x, q.y, q.z, eps};
        break;
      }
      // Harmonic measures of balls containing S_o (these also serve J and AS).
      double v = uniform01(g);
      if (tag != TestClass::Omega && v < 0.25) {
        double R = lerp(0.1 * c.RD, 0.95 * c.RD, uniform01(g));
        t.measure = ball_measure(c.d, c.o, R, 8, std::max(16, n / 4));
        t.kind = "ball_average";
        t.params = {R};
      } else if (v < 0.6) {
        double R = lerp(c.rhoS + 0.1 * span, c.RD * 0.98, uniform01(g));
        t.measure = sphere_measure(c.d, c.o, R, n);
        t.kind = "sphere";
        t.params = {R};
      } else {
        double delta = 0.3 * span * uniform01(g);
        Point cb = c.o + random_direction(c.d, g) * delta;
        double room = -cfg.domain.signed_distance(cb) * 0.98;
        double lo = c.rhoS + delta + 0.05 * span;
        double R = room > lo ? lerp(lo, room, uniform01(g)) : room;
        t.measure = ball_harmonic_measure(c.d, cb, R, c.o, n);
        t.kind = "ball_harmonic";
        t.params = {cb.x, cb.y, cb.z, R};
      }
      break;
    }
    case TestClass::JP:
    case TestClass::JP1: {
      double lambda = tag == TestClass::JP1 ? 1.0 : 0.4 + 0.6 * uniform01(g);
      if (smooth) {
        // Harmonic on D_o \\ o with D_o containing S_o^{4r}.
        double L = harmonic_core(c), U = Rin;
        double a = lerp(L, L + 0.5 * (U - L), uniform01(g));
        double b = lerp(a + 0.2 * (U - a), U, uniform01(g));
        RadialBump rb(c.d, c.o, a, b);
        t.kind = "smooth_radial";
        t.params = {a, b};
        t.eval = [rb](const Point& p) { return rb.green_like(p); };
        t.smooth = true;
        t.pole_coefficient = 1.0;
        Box box{c.o - Point(b, b, b), c.o + Point(b, b, b)};
        t.measure = density_measure(c.d, [rb](const Point& x) { return rb.density(x); }, box, (b - a) / 32.0);
      } else {
        t = green_mixture(c, g);
      }
      t = scaled(t, lambda);
      break;
    }
    case TestClass::ASP:
    case TestClass::ASP1: {
      double lambda = tag == TestClass::ASP1 ? 1.0 : 0.4 + 0.6 * uniform01(g);
      if (smooth) {
        double L = harmonic_core(c), U = Rin;
        Point cpt = c.o + random_direction(c.d, g) * (0.04 * (U - L) * uniform01(g));
        Rings rg = smooth_rings(c, L, U, cpt, true);
        double eps = rg.eps * (0.5 + 0.5 * uniform01(g));
        t.kind = "smooth_swept";
        t.params = {cpt.x, cpt.y, cpt.z, eps};
        t.eval = [rg, eps](const Point& p) {
          return rg.mu_o.green_like(p) + eps * (rg.nu1.potential(p) - rg.nu2.potential(p));
        };
        t.smooth = true;
        t.pole_coefficient = 1.0;
        Box box{c.o - Point(U, U, U), c.o + Point(U, U, U)};
        t.measure = density_measure(
            c.d,
            [rg, eps](const Point& x) {
              return std::max(0.0, rg.mu_o.density(x) + eps * (rg.nu1.density(x) - rg.nu2.density(x)));
            },
            box, (U - L) / 48.0);
      } else {
        Point cb = c.o + random_direction(c.d, g) * (0.2 * c.RD * uniform01(g));
        double room = -cfg.domain.signed_distance(cb) - 4.0 * c.hv - 0.02 * c.RD;
        double R = lerp(distance(cb, c.o) + 0.3 * c.RD, room, uniform01(g));
        Point q = cb + random_direction(c.d, g) * (0.6 * R * uniform01(g));
        if (distance(q, c.o) < 0.05 * R) q = c.o + random_direction(c.d, g) * (0.1 * R);
        t = green_difference(c, cb, R, q, 0.3 + 0.6 * uniform01(g));
      }
      t = scaled(t, lambda);
      break;
    }
    case TestClass::sbh0:
    case TestClass::sbh0_plus:
    case TestClass::sbh00_plus:
    case TestClass::sbh00_r:
    case TestClass::sbh_plus0_r:
    case TestClass::sbh_plus0_circ_r: {
      const bool positive = tag == TestClass::sbh0_plus || tag == TestClass::sbh00_plus;
      const bool compact = tag == TestClass::sbh00_plus || tag == TestClass::sbh00_r;
      const double hi = compact ? Rin : c.RD;
      double u = uniform01(g);
      if (smooth && positive) {
        double R = R_shell(Rin);
        FieldFn gb = ball_green(c.d, c.o, R, c.o);
        double gS = kInf;
        for (const auto& p : cfg.S_o.boundary_sample(256.0)) gS = std::min(gS, gb(p));
        t = cut_member(c, R, gS * (0.1 + 0.5 * uniform01(g)), true);
      } else if (smooth) {
        // a V_o - eps W_q with the pole q of W_q hidden in S_o.
        double L = std::max(c.rhoS, 0.05 * c.RD), U = Rin;
        Point q = hidden_point(c, g);
        Rings rg = smooth_rings(c, L, U, q, false);
        double eps = rg.eps * (0.5 + 0.5 * uniform01(g));
        RadialBump wq(c.d, q, rg.nu2.inner(), rg.nu2.outer());
        t.kind = "smooth_signed";
        t.params = {q.x, q.y, q.z, eps};
        RadialBump vo = rg.mu_o;
        t.eval = [vo, wq, eps](const Point& p) { return vo.green_like(p) - eps * wq.green_like(p); };
        t.smooth = true;
      } else if (index == 0 && !compact) {
        // Extremal member: Green's function of the largest ball about o.
        t = green_member(c, c.o, c.RD);
      } else if (positive || u < 0.35) {
        double R = R_shell(hi);
        if (u < 0.2 || !positive) {
          t = green_member(c, c.o, R);
        } else {
          FieldFn gb = ball_green(c.d, c.o, R, c.o);
          double gS = kInf;
          for (const auto& p : cfg.S_o.boundary_sample(256.0)) gS = std::min(gS, gb(p));
          t = cut_member(c, R, gS * 0.6 * uniform01(g), false);
        }
      } else {
        double R = R_shell(hi);
        t = green_difference(c, c.o, R, hidden_point(c, g), 0.2 + 0.75 * uniform01(g));
      }
      t.pole_coefficient = 0.0;
      const bool floor = tag == TestClass::sbh00_r || tag == TestClass::sbh_plus0_r ||
                         tag == TestClass::sbh_plus0_circ_r;
      t = scaled(t, bound_scale(extrema(t.eval, c), cfg, floor));
      break;
    }
  }
  return t;
}

}  // namespace

RadialBump::RadialBump(int dim, const Point& c, double a, double b) : dim_(dim), c_(c), a_(a), b_(b) {
  check_dimension(dim);
  if (!(0.0 <= a && a < b)) fail(ErrorKind::precondition, "radial bump needs 0 <= a < b");
  norm_ = 1.0;
  norm_ = gauss([&](double r) { return profile(r); }, a_, b_);
  inner_value_ = gauss([&](double r) { return kernel_radial(dim_, r) * profile(r); }, a_, b_);
}

double RadialBump::profile(double rho) const { return bump((2.0 * rho - a_ - b_) / (b_ - a_)) / norm_; }

double RadialBump::potential(const Point& y) const {
  double t = distance(y, c_);
  if (t <= a_) return inner_value_;
  double kt = kernel_radial(dim_, t);
  if (t >= b_) return kt;
  double below = gauss([&](double r) { return profile(r); }, a_, t);
  double above = gauss([&](double r) { return kernel_radial(dim_, r) * profile(r); }, t, b_);
  return kt * below + above;
}

double RadialBump::green_like(const Point& y) const {
  double t = distance(y, c_);
  if (t >= b_) return 0.0;
  if (t == 0.0 && dim_ >= 2) return kInf;
  return potential(y) - kernel_radial(dim_, t);
}

double RadialBump::density(const Point& x) const {
  double t = distance(x, c_);
  if (!(t > a_ && t < b_)) return 0.0;
  return profile(t) / (sphere_area(dim_ - 1) * std::pow(t, dim_ - 1));
}

DiscreteMeasure density_measure(int dim, const std::function<double(const Point&)>& f, const Box& box, double hq) {
  if (!(hq > 0.0)) fail(ErrorKind::precondition, "quadrature spacing must be positive");
  Grid g = Grid::covering(box, hq, dim);
  std::vector<Atom> atoms;
  CompensatedSum total;
  for (std::size_t i = 0; i < g.size(); ++i) {
    Point p = g.point(i);
    double v = f(p);
    if (v > 0.0) {
      atoms.push_back({p, v});
      total.add(v);
    }
  }
  if (!(total.value() > 0.0)) fail(ErrorKind::generation, "density has no mass on the quadrature lattice");
  for (auto& a : atoms) a.mass /= total.value();
  return DiscreteMeasure::from_atoms(dim, atoms);
}

TestFamily generate_family(TestClass tag, const GluingConfig& cfg, int count, std::uint64_t seed,
                           const FamilyOptions& opts) {
  cfg.validate();
  if (count < 1) fail(ErrorKind::usage, "family size must be positive");
  const int d = cfg.dim();
  double rhoS = 0.0, rin = 0.0;
  for (const auto& b : cfg.S_o.balls()) {
    rhoS = std::max(rhoS, distance(b.center, cfg.o) + b.radius);
    rin = std::max(rin, b.radius - distance(b.center, cfg.o));
  }
  double RD = -cfg.domain.signed_distance(cfg.o);
  if (!std::isfinite(RD)) fail(ErrorKind::precondition, "test families need a bounded domain");
  if (!(RD > rhoS)) fail(ErrorKind::generation, "no ball about o contains S_o inside D");
  double hv = opts.h > 0.0 ? opts.h : RD / 64.0;
  Ctx c{cfg, opts, d, cfg.o, rhoS, rin, RD, hv, gluing_grid(cfg, hv)};

  TestFamily F;
  F.class_tag = tag;
  F.smooth = opts.smooth;
  F.cfg = cfg;
  F.seed = seed;
  for (int i = 0; i < count; ++i) {
    bool ok = false;
    std::string last;
    for (int attempt = 0; attempt < opts.max_attempts && !ok; ++attempt) {
      Rng g(derive_seed(seed, static_cast<std::uint64_t>(i) * 1024 + attempt));
      TestFunction t;
      try {
        t = build_member(tag, opts.smooth, c, g, i);
      } catch (const Error& e) {
        last = e.what();
        ++F.regenerated;
        continue;
      }
      std::ostringstream id;
      id << to_string(tag) << (opts.smooth ? "~" : "") << "#" << i;
      t.id = id.str();
      if (opts.verify) {
        auto rep = verify_membership(t, tag, cfg, c.grid, opts.membership);
        if (!rep.passed) {
          last = rep.reason;
          ++F.regenerated;
          continue;
        }
      }
      F.members.push_back(std::move(t));
      ok = true;
    }
    if (!ok)
      fail(ErrorKind::generation, std::string("could not generate a member of ") + to_string(tag) + ": " + last);
  }
  return F;
}

namespace {

MarginReport finish(MarginReport rep, const MarginOptions& opts) {
  rep.max_margin = -kInf;
  rep.linear = opts.linear;
  rep.tol = opts.tol;
  bool nan = false;
  for (const auto& m : rep.members) {
    if (m.failed) {
      ++rep.failed;
      continue;
    }
    if (std::isnan(m.margin)) {
      nan = true;
      continue;
    }
    if (m.margin > rep.max_margin) {
      rep.max_margin = m.margin;
      rep.witness = m.id;
    }
  }
  rep.size = rep.members.size();
  bool bad = rep.max_margin == kInf || nan || (opts.linear && rep.max_margin > opts.tol);
  rep.verdict = bad ? "violated" : "consistent";
  return rep;
}

DiscreteMeasure restricted(const DiscreteMeasure& m, const Region& r) { return r ? restrict_measure(m, r) : m; }

}  // namespace

MarginReport affine_margin(const DiscreteMeasure& theta, const DiscreteMeasure& mu, const TestFamily& F,
                           const Region& region_theta, const Region& region_mu, const MarginOptions& opts) {
  DiscreteMeasure t = restricted(theta, region_theta), m = restricted(mu, region_mu);
  MarginReport rep;
  rep.family = std::string(to_string(F.class_tag)) + (F.smooth ? "~" : "");
  rep.members.resize(F.members.size());
  int threads = opts.threads > 0 ? opts.threads : default_thread_count();
  parallel_for(F.members.size(), threads, [&](std::size_t i) {
    const auto& v = F.members[i];
    auto& out = rep.members[i];
    out.id = v.id;
    try {
      if (!v.eval) fail(ErrorKind::evaluation, "member has no evaluator");
      double a = integrate(v.eval, t);
      double b = integrate(v.eval, m);
      if (std::isinf(a) && std::isinf(b) && a == b) fail(ErrorKind::evaluation, "margin is inf - inf");
      out.margin = a - b;
    } catch (const Error& e) {
      out.failed = true;
      out.error = e.what();
      out.margin = kNaN;
    }
  });
  return finish(std::move(rep), opts);
}

MarginReport affine_margin(const DiscreteMeasure& theta, const DiscreteMeasure& mu, const TestFamily& F,
                           const Region& region, const MarginOptions& opts) {
  return affine_margin(theta, mu, F, region, region, opts);
}

MarginReport measure_margin(const FieldFn& u, const FieldFn& M, const TestFamily& F, const MarginOptions& opts) {
  MarginReport rep;
  rep.family = std::string(to_string(F.class_tag)) + (F.smooth ? "~" : "");
  rep.members.resize(F.members.size());
  int threads = opts.threads > 0 ? opts.threads : default_thread_count();
  parallel_for(F.members.size(), threads, [&](std::size_t i) {
    const auto& v = F.members[i];
    auto& out = rep.members[i];
    out.id = v.id;
    try {
      if (!v.measure) fail(ErrorKind::evaluation, "member carries no measure");
      double a = integrate(u, *v.measure);
      double b = integrate(M, *v.measure);
      if (std::isinf(a) && std::isinf(b) && a == b) fail(ErrorKind::evaluation, "margin is inf - inf");
      out.margin = a - b;
    } catch (const Error& e) {
      out.failed = true;
      out.error = e.what();
      out.margin = kNaN;
    }
  });
  return finish(std::move(rep), opts);
}

SweepReport green_sweep(const DiscreteMeasure& theta, const DiscreteMeasure& mu, const GluingConfig& cfg,
                        const Region& region, const SweepOptions& opts) {
  double RD = -cfg.domain.signed_distance(cfg.o);
  if (!std::isfinite(RD) || !(RD > 0.0)) fail(ErrorKind::precondition, "sweep needs o inside a bounded domain");
  DiscreteMeasure t = restricted(theta, region), m = restricted(mu, region);
  SweepReport rep;
  std::vector<double> xs;
  for (double f : opts.fractions) {
    if (!(f > 0.0 && f < 1.0)) fail(ErrorKind::usage, "sweep fractions must lie in (0, 1)");
    double R = f * RD;
    FieldFn g = ball_green(cfg.dim(), cfg.o, R, cfg.o);
    rep.radii.push_back(R);
    rep.margins.push_back(integrate(g, t) - integrate(g, m));
    xs.push_back(std::log(1.0 / (1.0 - f)));
  }
  const std::size_t n = xs.size();
  if (n >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += xs[i];
      my += rep.margins[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sxy += (xs[i] - mx) * (rep.margins[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    rep.slope = sxx > 0 ? sxy / sxx : 0.0;
    if (!std::isfinite(rep.slope)) rep.slope = rep.margins.back() == kInf ? kInf : 0.0;
  }
  rep.diverging = !rep.margins.empty() && rep.slope > opts.min_slope && rep.margins.back() > opts.ceiling;
  return rep;
}

ConsistencyInput consistency_input(const ScalarField& u, const ScalarField& M, const std::optional<ScalarField>& h,
                                   const RieszOptions& riesz) {
  ConsistencyInput in;
  in.u = u.as_function();
  in.M = M.as_function();
  in.riesz_u = riesz_measure(u, riesz);
  in.riesz_M = riesz_measure(M, riesz);
  in.h = h;
  return in;
}

bool ConsistencyReport::any_violated() const {
  for (const auto& s : statements)
    if (s.verdict == "violated") return true;
  return false;
}

const StatementResult* ConsistencyReport::find(const std::string& id) const {
  for (const auto& s : statements)
    if (s.id == id) return &s;
  return nullptr;
}

namespace {

enum class RegionKind { off_S, off_o, off_S4r };

struct Statement {
  const char* id;
  bool harmonic;  // needs a harmonic witness
  bool measure_form;
  TestClass tag;
  bool smooth;
  RegionKind theta_region, mu_region;
};

constexpr Statement kStatements[] = {
    {"s2", false, true, TestClass::J, false, RegionKind::off_S, RegionKind::off_S},
    {"s3", false, true, TestClass::J, true, RegionKind::off_S, RegionKind::off_S},
    {"s4", false, true, TestClass::Omega, false, RegionKind::off_S, RegionKind::off_S},
    {"s5", false, false, TestClass::G, false, RegionKind::off_S, RegionKind::off_S},
    {"s6", false, false, TestClass::JP, false, RegionKind::off_o, RegionKind::off_o},
    {"s7", false, false, TestClass::sbh0_plus, false, RegionKind::off_S, RegionKind::off_S},
    {"s8", false, false, TestClass::sbh00_plus, true, RegionKind::off_S, RegionKind::off_S},
    {"s9", false, false, TestClass::JP1, true, RegionKind::off_o, RegionKind::off_o},
    {"h2", true, true, TestClass::AS, false, RegionKind::off_S, RegionKind::off_S},
    {"h3", true, true, TestClass::AS, true, RegionKind::off_S, RegionKind::off_S},
    {"h4", true, false, TestClass::ASP, false, RegionKind::off_o, RegionKind::off_o},
    {"h5", true, false, TestClass::sbh_plus0_circ_r, false, RegionKind::off_S, RegionKind::off_S4r},
    {"h6", true, false, TestClass::sbh_plus0_r, false, RegionKind::off_S, RegionKind::off_S},
    {"h7", true, false, TestClass::sbh00_r, true, RegionKind::off_S, RegionKind::off_S},
    {"h8", true, false, TestClass::ASP1, true, RegionKind::off_o, RegionKind::off_o},
};

}  // namespace

ConsistencyReport crit_consistency(const ConsistencyInput& in, const GluingConfig& cfg,
                                   const ConsistencyOptions& opts) {
  cfg.validate();
  if (!in.u || !in.M) fail(ErrorKind::usage, "u and M are required");
  ConsistencyReport rep;
  const Domain& D = cfg.domain;
  const double excl = 1e-9 * std::max(1.0, D.diameter());

  // Witness: u + h <= M on the lattice of h, and the sign of its Riesz measure.
  bool subharmonic_witness = false, harmonic_witness = false;
  if (in.h) {
    const ScalarField& h = *in.h;
    const Grid& g = h.grid();
    double worst = kInf;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!h.active(i)) continue;
      Point p = g.point(i);
      if (!D.contains(p)) continue;
      double u = in.u(p), M = in.M(p);
      if (std::isnan(u) || std::isnan(M) || u == -kInf) continue;
      worst = std::min(worst, M - u - h[i]);
    }
    rep.witness_margin = worst;
    RieszOptions ro;
    ro.pole_atoms = false;
    auto dh = riesz_measure(h, ro);
    double scale = 1.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (h.active(i) && std::isfinite(h[i])) scale = std::max(scale, std::abs(h[i]));
    bool below = worst >= -opts.witness_tol * scale;
    if (!below || dh.non_subharmonic) {
      rep.witness = "invalid";
    } else if (dh.positive_mass() + dh.negative_mass() <= opts.harmonic_tol) {
      rep.witness = "harmonic";
      harmonic_witness = subharmonic_witness = true;
    } else {
      rep.witness = "subharmonic";
      subharmonic_witness = true;
    }
  }
  StatementResult s1;
  s1.id = "s1";
  s1.form = "witness";
  s1.implied = subharmonic_witness;
  s1.verdict = subharmonic_witness ? "witnessed" : (rep.witness == "invalid" ? "violated" : "no witness");
  rep.statements.push_back(s1);
  StatementResult h1 = s1;
  h1.id = "h1";
  h1.implied = harmonic_witness;
  h1.verdict = harmonic_witness ? "witnessed" : (rep.witness == "invalid" ? "violated" : "no witness");
  rep.statements.push_back(h1);

  auto region = [&](RegionKind k) -> Region {
    switch (k) {
      case RegionKind::off_S:
        return [&cfg](const Point& p) { return cfg.domain.contains(p) && cfg.shell_distance(p) > 0.0; };
      case RegionKind::off_o:
        return [&cfg, excl](const Point& p) { return cfg.domain.contains(p) && distance(p, cfg.o) > excl; };
      case RegionKind::off_S4r:
        return [&cfg](const Point& p) { return cfg.domain.contains(p) && cfg.shell_distance(p) >= 4.0 * cfg.r; };
    }
    return {};
  };

  std::uint64_t stream = 0;
  for (const auto& st : kStatements) {
    StatementResult r;
    r.id = st.id;
    r.form = st.measure_form ? "measure" : "function";
    r.family = std::string(to_string(st.tag)) + (st.smooth ? "~" : "");
    r.implied = st.harmonic ? harmonic_witness : subharmonic_witness;
    FamilyOptions fo = opts.family;
    fo.smooth = st.smooth;
    auto F = generate_family(st.tag, cfg, opts.family_size, derive_seed(opts.seed, stream++), fo);
    if (st.measure_form)
      r.margins = measure_margin(in.u, in.M, F, opts.margin);
    else
      r.margins = affine_margin(in.riesz_u, in.riesz_M, F, region(st.theta_region), region(st.mu_region),
                                opts.margin);
    r.verdict = r.margins.verdict;
    if (st.tag == TestClass::G && opts.sweep_green) {
      r.sweep = green_sweep(in.riesz_u, in.riesz_M, cfg, region(RegionKind::off_S), opts.sweep);
      if (r.sweep->diverging) r.verdict = "violated";
    }
    if (r.implied && r.verdict == "violated")
      rep.findings.push_back(std::string(st.id) + " violated although the witness entails it");
    rep.statements.push_back(std::move(r));
  }
  return rep;
}

std::string consistency_csv(const ConsistencyReport& rep) {
  std::ostringstream os;
  os.precision(12);
  os << "statement,form,family,implied,size,max_margin,witness_member,failed,slope,verdict\n";
  for (const auto& s : rep.statements) {
    os << s.id << ',' << s.form << ',' << s.family << ',' << (s.implied ? 1 : 0) << ',' << s.margins.size << ',';
    if (s.form == "witness")
      os << rep.witness_margin;
    else
      os << s.margins.max_margin;
    os << ',' << s.margins.witness << ',' << s.margins.failed << ',';
    if (s.sweep) os << s.sweep->slope;
    os << ',' << s.verdict << '\n';
  }
  return os.str();
}

bool EmbeddingReport::passed() const {
  for (const auto& i : inclusions)
    if (i.failures > 0) return false;
  for (const auto& d : dominance)
    if (d.failures > 0) return false;
  return true;
}

EmbeddingReport embedding_check(const GluingConfig& cfg, std::uint64_t seed, const EmbeddingOptions& eo,
                                const FamilyOptions& opts) {
  static constexpr std::pair<TestClass, TestClass> kPairs[] = {
      {TestClass::sbh00_plus, TestClass::sbh0_plus},  {TestClass::sbh0_plus, TestClass::sbh0},
      {TestClass::sbh00_plus, TestClass::sbh00_r},    {TestClass::sbh0_plus, TestClass::sbh_plus0_r},
      {TestClass::sbh00_r, TestClass::sbh_plus0_r},   {TestClass::sbh_plus0_r, TestClass::sbh_plus0_circ_r},
      {TestClass::G, TestClass::JP1},                 {TestClass::JP1, TestClass::JP},
      {TestClass::JP1, TestClass::ASP1},              {TestClass::JP, TestClass::ASP},
      {TestClass::ASP1, TestClass::ASP},              {TestClass::Omega, TestClass::J},
      {TestClass::J, TestClass::AS},
  };
  cfg.validate();
  EmbeddingReport rep;
  const double RD = -cfg.domain.signed_distance(cfg.o);
  double hv = opts.h > 0.0 ? opts.h : RD / 64.0;
  Grid grid = gluing_grid(cfg, hv);
  std::uint64_t stream = 0;
  for (const auto& [from, to] : kPairs) {
    InclusionResult ir;
    ir.from = from;
    ir.to = to;
    auto F = generate_family(from, cfg, eo.members_per_class, derive_seed(seed, stream++), opts);
    for (const auto& m : F.members) {
      ++ir.tested;
      auto r = verify_membership(m, to, cfg, grid, opts.membership);
      if (!r.passed && ir.failures++ == 0) ir.first_failure = m.id + ": " + r.reason;
    }
    rep.inclusions.push_back(ir);
  }
  if (eo.dominance_members <= 0) return rep;

  GluingOptions go;
  go.h = hv;
  GreenFunction gD = make_green(cfg.domain, cfg.o, go);
  const bool exact = has_closed_form(cfg.domain);
  rep.tol = eo.tol + (exact ? 0.0 : 5.0 * hv);
  // Band sample: lattice points plus dS_o.
  std::vector<Point> band;
  for (const auto& p : cfg.S_o.boundary_sample(512.0 / std::max(cfg.r, 1e-3))) band.push_back(p);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Point p = grid.point(i);
    double ds = cfg.shell_distance(p);
    if (ds > 0.0 && ds < 4.0 * cfg.r) band.push_back(p);
  }
  double B1 = 0.0;
  std::vector<double> g_band(band.size());
  for (std::size_t j = 0; j < band.size(); ++j) {
    g_band[j] = gD(band[j]);
    B1 = std::max(B1, g_band[j]);
  }
  ScalarField g_grid = gD.sample(grid);
  CompactSet L = cfg.S_o.inflated(4.0 * cfg.r);

  for (TestClass cls : {TestClass::JP1, TestClass::ASP1}) {
    DominanceResult dr;
    dr.cls = cls;
    dr.B_prime = B1;
    dr.B_second = kInf;
    dr.worst_excess = -kInf;
    dr.band_max = -kInf;
    dr.band_min = kInf;
    FamilyOptions fo = opts;
    fo.smooth = true;
    auto F = generate_family(cls, cfg, eo.dominance_members, derive_seed(seed, stream++), fo);
    for (const auto& m : F.members) {
      ++dr.tested;
      std::string why;
      double lower = cls == TestClass::JP1 ? 0.0 : -kInf;
      if (cls == TestClass::ASP1) {
        if (!m.measure) fail(ErrorKind::consistency, "ASP1 member without a Riesz measure");
        lower = potential_lower_bound_dirac(*m.measure, cfg.o, L);
        dr.B_second = std::min(dr.B_second, lower);
      }
      for (std::size_t i = 0; i < grid.size(); ++i) {
        Point p = grid.point(i);
        if (p == cfg.o || !std::isfinite(g_grid[i])) continue;
        double excess = m.eval(p) - g_grid[i];
        dr.worst_excess = std::max(dr.worst_excess, excess);
        if (excess > rep.tol && why.empty()) why = "exceeds g_D";
      }
      for (std::size_t j = 0; j < band.size(); ++j) {
        double v = m.eval(band[j]);
        dr.band_max = std::max(dr.band_max, v);
        dr.band_min = std::min(dr.band_min, v);
        if (v > B1 + rep.tol && why.empty()) why = "exceeds B' on the band";
        if (v < lower - rep.tol && why.empty()) why = "below the band floor";
      }
      if (!why.empty() && dr.failures++ == 0) dr.first_failure = m.id + ": " + why;
    }
    if (cls == TestClass::JP1) dr.B_second = 0.0;
    rep.dominance.push_back(dr);
  }
  return rep;
}

}  // namespace potkit
