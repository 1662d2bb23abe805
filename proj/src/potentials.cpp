#include "potkit/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>

#include "potkit/errors.hpp"
#include "potkit/green.hpp"
#include "potkit/kernels.hpp"
#include "potkit/parallel.hpp"
#include "potkit/quadrature.hpp"
#include "potkit/rng.hpp"

namespace potkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Mean of K_{d-2}(., y) over the ball B(c, rho) for |y - c| = t < rho.
double ball_average_kernel(int d, double t, double rho) {
  if (d == 1) return (rho * rho + t * t) / (2 * rho);
  if (d == 2) return std::log(rho) - 0.5 + t * t / (2 * rho * rho);
  return -(3 * rho * rho - t * t) / (2 * rho * rho * rho);
}

struct Singular {
  double pos = 0.0, neg = 0.0;
};

void add_part(const MeasurePart& part, double sign, const Point& y, int d, CompensatedSum& sum, Singular& sing) {
  for (const auto& a : part.atoms) {
    if (a.mass == 0.0) continue;
    if (d >= 2 && a.point == y) {
      (sign > 0 ? sing.pos : sing.neg) += a.mass;
      continue;
    }
    sum.add(sign * a.mass * kernel_K(d, a.point, y));
  }
  if (!part.density) return;
  const ScalarField& f = *part.density;
  const Grid& g = f.grid();
  const double vol = g.cell_volume();
  const double rho = std::pow(vol / ball_volume(d), 1.0 / d);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!f.active(i) || f[i] == 0.0) continue;
    Point x = g.point(i);
    double t = distance(x, y);
    double k = t < rho ? ball_average_kernel(d, t, rho) : kernel_radial(d, t);
    sum.add(sign * f[i] * vol * k);
  }
}

}  // namespace

Potential::Potential(DiscreteMeasure base, std::optional<Point> pole) : base_(std::move(base)), pole_(pole) {
  check_dimension(base_.dim());
}

double Potential::operator()(const Point& y) const {
  const int d = dim();
  CompensatedSum sum;
  Singular sing;
  add_part(base_.positive(), 1.0, y, d, sum, sing);
  add_part(base_.negative(), -1.0, y, d, sum, sing);
  bool pole_here = false;
  if (pole_) {
    if (d >= 2 && *pole_ == y)
      pole_here = true;
    else
      sum.add(-kernel_K(d, *pole_, y));
  }
  if (sing.pos > 0.0 && sing.neg > 0.0)
    fail(ErrorKind::evaluation, "potential is indeterminate at a point carrying positive and negative atoms");
  double net = sing.pos - sing.neg - (pole_here ? 1.0 : 0.0);
  if (net > 0.0) return -kInf;
  if (net < 0.0 || (sing.neg > 0.0)) return kInf;
  return sum.value();
}

FieldFn Potential::as_function() const {
  auto self = std::make_shared<Potential>(*this);
  return [self](const Point& y) { return (*self)(y); };
}

ScalarField Potential::sample(const Grid& grid) const {
  ScalarField out(grid, 0.0);
  const std::size_t rows = static_cast<std::size_t>(grid.n[1]) * grid.n[2];
  parallel_for(rows, default_thread_count(), [&](std::size_t r) {
    for (int i = 0; i < grid.n[0]; ++i) {
      std::size_t idx = r * grid.n[0] + i;
      out[idx] = (*this)(grid.point(idx));
    }
  });
  return out;
}

double potential_eval(const Potential& p, const Point& y) { return p(y); }

namespace {

double support_distance(const DiscreteMeasure& mu, const CompactSet& L) {
  auto pts = mu.support_points();
  if (pts.empty()) fail(ErrorKind::precondition, "measure has empty support");
  double m = kInf;
  for (const auto& p : pts) m = std::min(m, L.distance(p));
  return m;
}

double k_of(int d, double t) {
  if (t == 0.0) return d >= 2 ? -kInf : 0.0;
  return k_q(d - 2, t);
}

}  // namespace

double potential_lower_bound(const DiscreteMeasure& mu, const CompactSet& L) {
  if (!mu.is_positive()) fail(ErrorKind::precondition, "lower bound needs a positive measure");
  double dist = support_distance(mu, L);
  double mass = mu.total_mass();
  double k = k_of(mu.dim(), dist);
  if (mass == 0.0) return 0.0;
  return mass * k;
}

double potential_lower_bound_dirac(const DiscreteMeasure& mu, const Point& o, const CompactSet& L) {
  double b = potential_lower_bound(mu, L);
  return b - k_of(mu.dim(), L.sup_norm() + norm(o));
}

Potential duality_forward(const DiscreteMeasure& mu, const Point& o) {
  if (!mu.is_positive()) fail(ErrorKind::precondition, "duality map needs a positive measure");
  return Potential(mu, o);
}

PoleFit fit_pole_coefficient(const ScalarField& V, const Point& o, const PoleFitOptions& opts) {
  const Grid& g = V.grid();
  const int d = g.dim;
  double dist;
  if (opts.domain) {
    dist = opts.domain->boundary_distance(o);
  } else {
    Box b = g.bounds();
    dist = kInf;
    for (int a = 0; a < d; ++a) dist = std::min({dist, o[a] - b.lo[a], b.hi[a] - o[a]});
  }
  double r = opts.r;
  if (!(r > 0.0)) {
    r = 0.05 * dist;
    if (!opts.near_pole) r = std::max(r, 16.0 * g.h);
  }
  if (d == 2 && r >= 1.0) fail(ErrorKind::precondition, "pole-fit radius must be below 1 in the plane");
  if (d == 1) fail(ErrorKind::precondition, "pole fit needs d >= 2");
  SphereRule rule = sphere_rule(d, opts.directions);
  PoleFit fit;
  std::vector<double> s;
  for (double rho : {r, r / 2, r / 4}) {
    double best = -kInf;
    CompensatedSum mean;
    double kk = -kernel_radial(d, rho);
    for (std::size_t j = 0; j < rule.dirs.size(); ++j) {
      Point y = o + rule.dirs[j] * rho;
      double v;
      if (opts.near_pole) {
        v = opts.near_pole(y);
      } else {
        auto iv = V.interpolate(y);
        if (!iv) fail(ErrorKind::resolution, "field unavailable on the pole-fit sphere");
        v = *iv;
      }
      if (!std::isfinite(v)) fail(ErrorKind::resolution, "non-finite value on the pole-fit sphere");
      best = std::max(best, v / kk);
      mean.add(rule.weights[j] * v / kk);
    }
    fit.radii.push_back(rho);
    fit.ratios.push_back(mean.value());
    fit.sup_ratios.push_back(best);
    s.push_back(1.0 / kk);
  }
  // Least squares ratio = a + b s.
  double n = 3, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < 3; ++i) {
    sx += s[i];
    sy += fit.ratios[i];
    sxx += s[i] * s[i];
    sxy += s[i] * fit.ratios[i];
  }
  double den = n * sxx - sx * sx;
  double b = den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
  double a = (sy - b * sx) / n;
  fit.coefficient = a;
  for (int i = 0; i < 3; ++i) fit.spread = std::max(fit.spread, std::abs(fit.ratios[i] - a - b * s[i]));
  return fit;
}

DualityResult duality_inverse(const ScalarField& V, const Point& o, const DualityOptions& opts) {
  const Grid& g = V.grid();
  double ex = opts.exclusion > 0.0 ? opts.exclusion : 2.0 * g.h;
  ScalarField masked = V;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (distance(g.point(i), o) <= ex) masked.set_active(i, false);
  DualityResult res;
  DiscreteMeasure mu = riesz_measure(masked, opts.riesz);
  // The hole around o is the pole itself, not part of the measure.
  for (MeasurePart* part : {&mu.positive(), &mu.negative()}) {
    std::vector<Atom> kept;
    for (const auto& a : part->atoms)
      if (distance(a.point, o) > ex) kept.push_back(a);
    part->atoms = std::move(kept);
  }
  res.measure = std::move(mu);
  res.fit = fit_pole_coefficient(V, o, opts.pole);
  if (res.fit.spread > opts.pole.spread_tol)
    fail(ErrorKind::estimator, "pole ratio sequence does not settle (spread " + std::to_string(res.fit.spread) + ")");
  res.dirac_coefficient = 1.0 - res.fit.coefficient;
  return res;
}

const char* to_string(PotentialClass c) {
  switch (c) {
    case PotentialClass::ASP: return "ASP";
    case PotentialClass::ASP1: return "ASP1";
    case PotentialClass::JP: return "JP";
    case PotentialClass::JP1: return "JP1";
    case PotentialClass::none: return "none";
  }
  return "?";
}

Classification classify_potential(const ScalarField& V, const Domain& domain, const Point& o,
                                  const ClassifyOptions& opts) {
  const Grid& g = V.grid();
  const double h = g.h;
  Classification c;
  double band = opts.band_width > 0.0 ? opts.band_width : 3.0 * h;
  c.min_value = kInf;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!V.active(i)) continue;
    Point p = g.point(i);
    if (domain.signed_distance(p) > -band) c.band_max = std::max(c.band_max, std::abs(V[i]));
    if (distance(p, o) > 0.0 && !std::isnan(V[i])) c.min_value = std::min(c.min_value, V[i]);
  }
  c.vanishes_near_boundary = c.band_max <= opts.zero_tol;
  c.nonnegative = c.min_value >= -opts.nonneg_tol;

  std::vector<double> radii = opts.radii.empty() ? std::vector<double>{2 * h, 4 * h} : opts.radii;
  double rmax = *std::max_element(radii.begin(), radii.end());
  ScalarField cut = V;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (distance(g.point(i), o) <= rmax + 2 * h) cut.set_active(i, false);
  auto rep = subharmonicity_test(cut, radii);
  c.subharmonic_violations = rep.violations;
  c.subharmonic = rep.violations == 0;

  PoleFitOptions po = opts.pole;
  if (!po.domain) po.domain = domain;
  try {
    c.fit = fit_pole_coefficient(V, o, po);
  } catch (const Error& e) {
    c.reason = e.what();
    return c;
  }
  bool settled = c.fit.spread <= po.spread_tol;
  c.pole_upper = settled && c.fit.coefficient <= 1.0 + opts.pole_tol;
  c.pole_two_sided = settled && std::abs(c.fit.coefficient - 1.0) <= opts.pole_tol;

  if (!c.vanishes_near_boundary) {
    c.reason = "does not vanish near the boundary";
  } else if (!c.subharmonic) {
    c.reason = "not subharmonic away from the pole";
  } else if (!settled) {
    c.reason = "pole ratio does not settle";
  } else if (!c.pole_upper) {
    c.reason = "pole coefficient above 1";
  } else if (c.pole_two_sided) {
    c.cls = c.nonnegative ? PotentialClass::JP1 : PotentialClass::ASP1;
  } else {
    c.cls = c.nonnegative ? PotentialClass::JP : PotentialClass::ASP;
  }
  return c;
}

namespace {

struct Probe {
  std::string id;
  FieldFn v;
  bool harmonic = false;
};

Point random_point(const Box& b, int d, Rng& rng) {
  Point p;
  for (int a = 0; a < d; ++a) p[a] = b.lo[a] + (b.hi[a] - b.lo[a]) * uniform01(rng);
  return p;
}

std::vector<Probe> harmonic_probes(int d, int count, std::uint64_t seed) {
  std::vector<Probe> out;
  Rng rng(derive_seed(seed, 0));
  std::normal_distribution<double> nd;
  for (int i = 0; i < count; ++i) {
    std::string id = "harmonic_" + std::to_string(i);
    if (d == 1) {
      double a = nd(rng), b = nd(rng);
      out.push_back({id, [a, b](const Point& p) { return a * p.x + b; }, true});
    } else if (d == 2) {
      int deg = 1 + i % 5;
      std::vector<std::complex<double>> c(deg + 1);
      for (auto& z : c) z = {nd(rng), nd(rng)};
      bool imag = i % 2 == 1;
      out.push_back({id, [c, imag](const Point& p) {
                       std::complex<double> z(p.x, p.y), acc = 0;
                       for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
                       return imag ? acc.imag() : acc.real();
                     }, true});
    } else {
      std::vector<double> w(10);
      for (auto& x : w) x = nd(rng);
      out.push_back({id, [w](const Point& p) {
                       return w[0] + w[1] * p.x + w[2] * p.y + w[3] * p.z + w[4] * p.x * p.y + w[5] * p.y * p.z +
                              w[6] * p.x * p.z + w[7] * (p.x * p.x - p.y * p.y) + w[8] * (p.y * p.y - p.z * p.z) +
                              w[9] * p.x * p.y * p.z;
                     }, true});
    }
  }
  return out;
}

std::vector<Probe> subharmonic_probes(const DiscreteMeasure& mu, const Point& o, const Domain& domain, const Box& box,
                                      int count, std::uint64_t seed) {
  const int d = mu.dim();
  std::vector<Probe> out;
  std::normal_distribution<double> nd;
  {
    Rng rng(derive_seed(seed, 1));
    for (int i = 0; i < count; ++i) {
      int deg = 1 + i % 4;
      std::vector<Point> roots;
      for (int k = 0; k < deg; ++k) roots.push_back(random_point(box, d, rng));
      out.push_back({(d == 2 ? "log_poly_" : "kernel_sum_") + std::to_string(i), [roots, d](const Point& p) {
                       double s = 0.0;
                       for (const auto& r : roots) s += kernel_K(d, p, r);
                       return s;
                     }});
    }
  }
  {
    Rng rng(derive_seed(seed, 2));
    for (int i = 0; i < count; ++i) {
      int m = 2 + i % 4;
      std::vector<std::array<double, 4>> aff(m);
      for (auto& a : aff)
        for (auto& x : a) x = nd(rng);
      out.push_back({"max_affine_" + std::to_string(i), [aff](const Point& p) {
                       double best = -kInf;
                       for (const auto& a : aff) best = std::max(best, a[0] + a[1] * p.x + a[2] * p.y + a[3] * p.z);
                       return best;
                     }});
    }
  }
  {
    Rng rng(derive_seed(seed, 3));
    auto support = mu.support_points();
    for (int i = 0; i < count; ++i) {
      Point w;
      // A quarter of the kernel probes sit just beyond support points, on the
      // far side from o: these separate an atom from o.
      if (i < count / 4 && !support.empty()) {
        Point a = support[(static_cast<std::size_t>(i) * 7919) % support.size()];
        w = a + (a - o) * 0.25;
      } else
        w = random_point(box, d, rng);
      double lam = 0.25 + 2.0 * uniform01(rng);
      out.push_back({"kernel_" + std::to_string(i),
                     [w, lam, d](const Point& p) { return lam * kernel_K(d, p, w); }});
    }
  }
  if (has_closed_form(domain)) {
    Rng rng(derive_seed(seed, 4));
    Box db = domain.bounding_box();
    for (int i = 0, tries = 0; i < count && tries < 100 * count; ++tries) {
      Point w = random_point(db, d, rng);
      if (!(domain.signed_distance(w) < 0.0)) continue;
      double lam = 0.25 + 2.0 * uniform01(rng);
      Domain dom = domain;
      out.push_back({"neg_green_" + std::to_string(i),
                     [dom, w, lam](const Point& p) { return -lam * green_closed_form(dom, w, p); }});
      ++i;
    }
  }
  return out;
}

}  // namespace

JensenReport jensen_measure_check(const DiscreteMeasure& mu, const Point& o, const Domain& domain,
                                  const JensenOptions& opts) {
  const int d = mu.dim();
  JensenReport rep;
  rep.variant = opts.variant;
  rep.seed = opts.seed;
  rep.tol = opts.tol;

  Box box{o, o};
  for (const auto& p : mu.support_points())
    for (int a = 0; a < d; ++a) {
      box.lo[a] = std::min(box.lo[a], p[a]);
      box.hi[a] = std::max(box.hi[a], p[a]);
    }
  double pad = 0.5;
  for (int a = 0; a < d; ++a) pad = std::max(pad, 0.5 * (box.hi[a] - box.lo[a]));
  box = box.inflated(pad, d);

  std::vector<Probe> probes = harmonic_probes(d, opts.probe_count, opts.seed);
  if (opts.variant == MeasureVariant::jensen) {
    auto sub = subharmonic_probes(mu, o, domain, box, opts.probe_count, opts.seed);
    probes.insert(probes.end(), sub.begin(), sub.end());
  }
  rep.margins.resize(probes.size());
  parallel_for(probes.size(), default_thread_count(), [&](std::size_t i) {
    const Probe& pr = probes[i];
    ProbeMargin m{pr.id, kInf};
    try {
      double vo = pr.v(o);
      double iv = integrate(pr.v, mu);
      if (pr.harmonic)
        m.margin = std::abs(iv - vo);
      else if (vo == -kInf)
        m.margin = kInf;
      else
        m.margin = iv - vo;
    } catch (const Error&) {
      m.margin = std::numeric_limits<double>::quiet_NaN();
    }
    rep.margins[i] = m;
  });
  // Harmonic probes pass when |margin| <= tol; subharmonic ones when margin >= -tol.
  rep.passed = true;
  double worst_excess = -kInf;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    double m = rep.margins[i].margin;
    if (std::isnan(m)) continue;
    double excess = probes[i].harmonic ? m - opts.tol : -m - opts.tol;
    if (excess > worst_excess) {
      worst_excess = excess;
      rep.worst_margin = probes[i].harmonic ? -m : m;
      rep.worst_probe = rep.margins[i].id;
    }
    if (excess > 0.0) rep.passed = false;
  }
  return rep;
}

PoissonJensenResult poisson_jensen_check(const FieldFn& u, const DiscreteMeasure& riesz_u, const DiscreteMeasure& mu,
                                         const Point& o, const FieldFn& potential) {
  PoissonJensenResult r;
  r.u_o = u(o);
  if (r.u_o == -kInf) fail(ErrorKind::precondition, "u(o) must be finite");
  r.integral_u = integrate(u, mu);
  FieldFn pt = potential ? potential : duality_forward(mu, o).as_function();
  // Integrate over D \ o: the point o itself carries no Riesz mass when u(o) > -inf.
  FieldFn off_pole = [&](const Point& x) { return x == o ? 0.0 : pt(x); };
  r.integral_potential = integrate(off_pole, riesz_u);
  r.residual = std::abs(r.u_o - r.integral_u + r.integral_potential);
  return r;
}

}  // namespace potkit
