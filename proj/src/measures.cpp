#include "potkit/measures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>

#include "potkit/errors.hpp"
#include "potkit/kernels.hpp"
#include "potkit/quadrature.hpp"

namespace potkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool same_grid(const Grid& a, const Grid& b) {
  return a.dim == b.dim && a.h == b.h && a.n == b.n && a.origin == b.origin;
}

void append_density_as_atoms(std::vector<Atom>& atoms, const ScalarField& d, double scale) {
  const double vol = d.grid().cell_volume();
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d.active(i) && d[i] != 0.0) atoms.push_back({d.grid().point(i), scale * d[i] * vol});
}

}  // namespace

double MeasurePart::mass() const {
  CompensatedSum s;
  for (const auto& a : atoms) s.add(a.mass);
  if (density) {
    const double vol = density->grid().cell_volume();
    for (std::size_t i = 0; i < density->size(); ++i)
      if (density->active(i)) s.add((*density)[i] * vol);
  }
  return s.value();
}

bool MeasurePart::empty() const {
  for (const auto& a : atoms)
    if (a.mass != 0.0) return false;
  if (density)
    for (std::size_t i = 0; i < density->size(); ++i)
      if (density->active(i) && (*density)[i] != 0.0) return false;
  return true;
}

DiscreteMeasure DiscreteMeasure::dirac(int dim, const Point& p, double mass) {
  DiscreteMeasure m(dim);
  m.add_atom(p, mass);
  return m;
}

DiscreteMeasure DiscreteMeasure::from_atoms(int dim, const std::vector<Atom>& atoms) {
  DiscreteMeasure m(dim);
  for (const auto& a : atoms) m.add_atom(a.point, a.mass);
  return m;
}

void DiscreteMeasure::add_atom(const Point& p, double mass) {
  if (!std::isfinite(mass)) fail(ErrorKind::domain, "atom mass must be finite");
  if (mass > 0.0)
    pos_.atoms.push_back({p, mass});
  else if (mass < 0.0)
    neg_.atoms.push_back({p, -mass});
}

DiscreteMeasure DiscreteMeasure::scaled(double a) const {
  DiscreteMeasure out(dim_);
  out.non_subharmonic = non_subharmonic;
  MeasurePart p = pos_, n = neg_;
  double s = std::abs(a);
  for (auto& at : p.atoms) at.mass *= s;
  for (auto& at : n.atoms) at.mass *= s;
  for (MeasurePart* part : {&p, &n})
    if (part->density)
      for (auto& v : part->density->values()) v *= s;
  if (a >= 0.0) {
    out.pos_ = std::move(p);
    out.neg_ = std::move(n);
  } else {
    out.pos_ = std::move(n);
    out.neg_ = std::move(p);
  }
  return out;
}

DiscreteMeasure DiscreteMeasure::operator+(const DiscreteMeasure& o) const {
  if (o.dim_ != dim_) fail(ErrorKind::domain, "adding measures of different dimensions");
  DiscreteMeasure out = *this;
  out.non_subharmonic = non_subharmonic || o.non_subharmonic;
  auto merge = [](MeasurePart& into, const MeasurePart& from) {
    into.atoms.insert(into.atoms.end(), from.atoms.begin(), from.atoms.end());
    if (!from.density) return;
    if (!into.density) {
      into.density = from.density;
    } else if (same_grid(into.density->grid(), from.density->grid())) {
      auto& a = *into.density;
      const auto& b = *from.density;
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (!b.active(i)) continue;
        if (!a.active(i)) {
          a.set_active(i, true);
          a[i] = 0.0;
        }
        a[i] += b[i];
      }
    } else {
      append_density_as_atoms(into.atoms, *from.density, 1.0);
    }
  };
  merge(out.pos_, o.pos_);
  merge(out.neg_, o.neg_);
  return out;
}

std::vector<Point> DiscreteMeasure::support_points() const {
  std::vector<Point> out;
  for (const MeasurePart* part : {&pos_, &neg_}) {
    for (const auto& a : part->atoms)
      if (a.mass != 0.0) out.push_back(a.point);
    if (part->density)
      for (std::size_t i = 0; i < part->density->size(); ++i)
        if (part->density->active(i) && (*part->density)[i] != 0.0) out.push_back(part->density->grid().point(i));
  }
  return out;
}

void DiscreteMeasure::merge_atoms(double radius) {
  for (MeasurePart* part : {&pos_, &neg_}) {
    std::vector<Atom> merged;
    for (const auto& a : part->atoms) {
      bool done = false;
      for (auto& m : merged)
        if (distance(m.point, a.point) <= radius) {
          m.mass += a.mass;
          done = true;
          break;
        }
      if (!done) merged.push_back(a);
    }
    part->atoms = std::move(merged);
  }
}

namespace {

// Integral over one part; returns (value, hit +inf, hit -inf).
struct PartIntegral {
  double value = 0.0;
  bool pos_inf = false;
  bool neg_inf = false;
};

PartIntegral integrate_part(const FieldFn& v, const MeasurePart& part, const IntegrateOptions& opts) {
  PartIntegral r;
  CompensatedSum s;
  auto take = [&](const Point& p, double m) {
    if (m == 0.0) return;
    double x = v(p);
    if (std::isnan(x)) fail(ErrorKind::evaluation, "test function returned NaN on the support");
    if (x == kInf) {
      if (m > opts.negligible_mass) r.pos_inf = true;
      return;
    }
    if (x == -kInf) {
      if (m > opts.negligible_mass) r.neg_inf = true;
      return;
    }
    s.add(m * x);
  };
  for (const auto& a : part.atoms) {
    take(a.point, a.mass);
    if (r.pos_inf) return r;
  }
  if (part.density) {
    const auto& d = *part.density;
    const double vol = d.grid().cell_volume();
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (!d.active(i) || d[i] == 0.0) continue;
      take(d.grid().point(i), d[i] * vol);
      if (r.pos_inf) return r;
    }
  }
  r.value = s.value();
  return r;
}

}  // namespace

double integrate(const FieldFn& v, const DiscreteMeasure& mu, const IntegrateOptions& opts) {
  PartIntegral p = integrate_part(v, mu.positive(), opts);
  if (p.pos_inf) return kInf;
  PartIntegral n = integrate_part(v, mu.negative(), opts);
  double plus = p.neg_inf ? -kInf : p.value;
  double minus = n.pos_inf ? kInf : (n.neg_inf ? -kInf : n.value);
  if (std::isinf(plus) && std::isinf(minus) && (plus > 0) == (minus > 0))
    fail(ErrorKind::evaluation, "indeterminate difference of infinite integrals");
  return plus - minus;
}

double integrate(const ScalarField& v, const DiscreteMeasure& mu, const IntegrateOptions& opts) {
  return integrate(v.as_function(), mu, opts);
}

namespace {

bool usable(const ScalarField& u, std::size_t i) { return u.active(i) && std::isfinite(u[i]); }

void add_pole_atoms(const ScalarField& u, const ScalarField& lap, double cd, const RieszOptions& opts,
                    DiscreteMeasure& mu) {
  const Grid& g = u.grid();
  std::vector<char> seen(g.size(), 0);
  const int m = opts.pole_margin;
  for (std::size_t s0 = 0; s0 < g.size(); ++s0) {
    if (seen[s0] || usable(u, s0)) continue;
    std::vector<std::size_t> comp{s0};
    seen[s0] = 1;
    bool has_nonfinite = false, touches_edge = false;
    std::array<int, 3> lo = g.coords(s0), hi = lo;
    for (std::size_t q = 0; q < comp.size(); ++q) {
      auto c = g.coords(comp[q]);
      if (u.active(comp[q])) has_nonfinite = true;
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], c[a]);
        hi[a] = std::max(hi[a], c[a]);
      }
      const int rj = g.dim > 1 ? 1 : 0, rk = g.dim > 2 ? 1 : 0;
      for (int dk = -rk; dk <= rk; ++dk)
        for (int dj = -rj; dj <= rj; ++dj)
          for (int di = -1; di <= 1; ++di) {
            int x = c[0] + di, y = c[1] + dj, z = c[2] + dk;
            if (!g.in_range(x, y, z)) {
              touches_edge = true;
              continue;
            }
            std::size_t ni = g.index(x, y, z);
            if (!seen[ni] && !usable(u, ni)) {
              seen[ni] = 1;
              comp.push_back(ni);
            }
          }
    }
    if (touches_edge) continue;
    bool small = true;
    for (int a = 0; a < g.dim; ++a)
      if (hi[a] - lo[a] + 1 > opts.max_hole_extent) small = false;
    if (!has_nonfinite && !small) continue;
    // Box of nodes [blo, bhi]; flux across its faces.
    std::array<int, 3> blo{0, 0, 0}, bhi{0, 0, 0};
    bool fits = true;
    for (int a = 0; a < g.dim; ++a) {
      blo[a] = lo[a] - m;
      bhi[a] = hi[a] + m;
      if (blo[a] - 1 < 0 || bhi[a] + 1 >= g.n[a]) fits = false;
    }
    if (!fits) continue;
    CompensatedSum flux, inside;
    bool ok = true;
    for (int k = blo[2]; k <= bhi[2] && ok; ++k)
      for (int j = blo[1]; j <= bhi[1] && ok; ++j)
        for (int i = blo[0]; i <= bhi[0] && ok; ++i) {
          std::size_t idx = g.index(i, j, k);
          if (lap.active(idx)) inside.add(lap[idx] * g.h * g.h);
          int c[3] = {i, j, k};
          for (int a = 0; a < g.dim && ok; ++a)
            for (int sgn : {-1, 1}) {
              bool face = sgn < 0 ? c[a] == blo[a] : c[a] == bhi[a];
              if (!face) continue;
              int q[3] = {i, j, k};
              q[a] += sgn;
              std::size_t out = g.index(q[0], q[1], q[2]);
              if (!usable(u, idx) || !usable(u, out)) {
                ok = false;
                break;
              }
              flux.add(u[out] - u[idx]);
            }
        }
    if (!ok) continue;
    const double scale = g.cell_volume() / (g.h * g.h);
    double mass = cd * scale * (flux.value() - inside.value());
    Point centre;
    for (auto idx : comp) centre = centre + g.point(idx);
    centre = centre / static_cast<double>(comp.size());
    mu.add_atom(centre, mass);
  }
}

}  // namespace

DiscreteMeasure riesz_measure(const ScalarField& u, const RieszOptions& opts) {
  const Grid& g = u.grid();
  const double cd = riesz_constant(g.dim);
  ScalarField lap = discrete_laplacian(u);

  // Fourth differences estimate the stencil truncation error (h^2/12) u''''.
  std::vector<double> err(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!lap.active(i)) continue;
    auto c = g.coords(i);
    double e = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      double vals[5];
      bool ok = true;
      for (int s = -2; s <= 2 && ok; ++s) {
        int q[3] = {c[0], c[1], c[2]};
        q[a] += s;
        if (!g.in_range(q[0], q[1], q[2])) {
          ok = false;
          break;
        }
        std::size_t qi = g.index(q[0], q[1], q[2]);
        if (!u.active(qi) || !std::isfinite(u[qi])) ok = false;
        vals[s + 2] = u[qi];
      }
      if (ok) e += std::abs(vals[0] - 4 * vals[1] + 6 * vals[2] - 4 * vals[3] + vals[4]);
    }
    err[i] = e / (12.0 * g.h * g.h);
  }

  DiscreteMeasure mu(g.dim);
  ScalarField pos(g, 0.0, false), neg(g, 0.0, false);
  bool any_neg = false;
  std::vector<std::pair<std::size_t, double>> clamped;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!lap.active(i)) continue;
    double val = cd * lap[i];
    if (val >= 0.0) {
      pos[i] = val;
      pos.set_active(i, true);
      continue;
    }
    double tol = 0.0;
    auto c = g.coords(i);
    for (int dk = (g.dim > 2 ? -1 : 0); dk <= (g.dim > 2 ? 1 : 0); ++dk)
      for (int dj = (g.dim > 1 ? -1 : 0); dj <= (g.dim > 1 ? 1 : 0); ++dj)
        for (int di = -1; di <= 1; ++di)
          if (g.in_range(c[0] + di, c[1] + dj, c[2] + dk))
            tol = std::max(tol, err[g.index(c[0] + di, c[1] + dj, c[2] + dk)]);
    tol = opts.tol_factor * cd * tol + opts.abs_tol;
    if (-val <= tol) {
      clamped.push_back({i, -val});
      continue;
    }
    neg[i] = -val;
    neg.set_active(i, true);
    any_neg = true;
  }
  // Clamped deficits are taken from positive cells within two steps so the
  // net mass (a discrete boundary flux) is preserved.
  const int rj = g.dim > 1 ? 2 : 0, rk = g.dim > 2 ? 2 : 0;
  for (const auto& [i, q] : clamped) {
    auto c = g.coords(i);
    double avail = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
      double take = pass == 0 ? 0.0 : std::min(1.0, q / avail);
      for (int dk = -rk; dk <= rk; ++dk)
        for (int dj = -rj; dj <= rj; ++dj)
          for (int di = -2; di <= 2; ++di) {
            if (!g.in_range(c[0] + di, c[1] + dj, c[2] + dk)) continue;
            std::size_t j = g.index(c[0] + di, c[1] + dj, c[2] + dk);
            if (!pos.active(j) || pos[j] <= 0.0) continue;
            if (pass == 0)
              avail += pos[j];
            else
              pos[j] -= take * pos[j];
          }
      if (avail <= 0.0) break;
    }
  }
  mu.positive().density = std::move(pos);
  if (opts.pole_atoms) add_pole_atoms(u, lap, cd, opts, mu);
  if (any_neg) mu.negative().density = std::move(neg);
  mu.non_subharmonic = any_neg;
  return mu;
}

DiscreteMeasure counting_measure(int dim, const std::vector<ZeroPoint>& zeros) {
  std::vector<Atom> atoms;
  for (const auto& z : zeros) {
    if (z.multiplicity <= 0) fail(ErrorKind::domain, "multiplicity must be a positive integer");
    bool merged = false;
    for (auto& a : atoms)
      if (a.point == z.point) {
        a.mass += z.multiplicity;
        merged = true;
      }
    if (!merged) atoms.push_back({z.point, static_cast<double>(z.multiplicity)});
  }
  return DiscreteMeasure::from_atoms(dim, atoms);
}

DiscreteMeasure restrict_measure(const DiscreteMeasure& mu, const std::function<bool(const Point&)>& region) {
  DiscreteMeasure out = mu;
  for (MeasurePart* part : {&out.positive(), &out.negative()}) {
    std::vector<Atom> kept;
    for (const auto& a : part->atoms)
      if (region(a.point)) kept.push_back(a);
    part->atoms = std::move(kept);
    if (part->density) {
      auto& d = *part->density;
      for (std::size_t i = 0; i < d.size(); ++i)
        if (d.active(i) && !region(d.grid().point(i))) {
          d[i] = 0.0;
          d.set_active(i, false);
        }
    }
  }
  return out;
}

DiscreteMeasure sphere_measure(int dim, const Point& c, double r, int n_points) {
  SphereRule rule = sphere_rule(dim, n_points);
  DiscreteMeasure m(dim);
  for (std::size_t j = 0; j < rule.dirs.size(); ++j) m.add_atom(c + rule.dirs[j] * r, rule.weights[j]);
  return m;
}

DiscreteMeasure ball_measure(int dim, const Point& c, double r, int n_radial, int n_angular) {
  // s = (rho / r)^d is uniformly distributed under normalised volume.
  GaussRule gl = gauss_legendre(n_radial);
  SphereRule rule = sphere_rule(dim, n_angular);
  DiscreteMeasure m(dim);
  for (int a = 0; a < n_radial; ++a) {
    double s = 0.5 * (gl.nodes[a] + 1.0);
    double rho = r * std::pow(s, 1.0 / dim);
    for (std::size_t j = 0; j < rule.dirs.size(); ++j)
      m.add_atom(c + rule.dirs[j] * rho, 0.5 * gl.weights[a] * rule.weights[j]);
  }
  return m;
}

DiscreteMeasure ball_harmonic_measure(int dim, const Point& c, double R, const Point& o, int n_points) {
  double a2 = dot(o - c, o - c);
  if (!(a2 < R * R)) fail(ErrorKind::domain, "harmonic measure needs an interior point");
  SphereRule rule = sphere_rule(dim, n_points);
  std::vector<Atom> atoms;
  CompensatedSum total;
  for (std::size_t j = 0; j < rule.dirs.size(); ++j) {
    Point z = c + rule.dirs[j] * R;
    double t = distance(z, o);
    double p = 0.0;
    if (dim == 1)
      p = (R + (z.x - c.x > 0 ? 1 : -1) * (o.x - c.x)) / R;
    else if (dim == 2)
      p = (R * R - a2) / (t * t);
    else
      p = R * (R * R - a2) / (t * t * t);
    atoms.push_back({z, rule.weights[j] * p});
    total.add(rule.weights[j] * p);
  }
  for (auto& at : atoms) at.mass /= total.value();
  return DiscreteMeasure::from_atoms(dim, atoms);
}

}  // namespace potkit
