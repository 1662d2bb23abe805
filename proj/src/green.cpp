#include "potkit/green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "potkit/errors.hpp"
#include "potkit/kernels.hpp"
#include "potkit/parallel.hpp"
#include "potkit/quadrature.hpp"

namespace potkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kChunk = 4096;

double default_eps(const Domain& d, const WosOptions& o) {
  if (o.eps_shell > 0.0) return o.eps_shell;
  double diam = std::min(d.diameter(), 1e3);
  return 1e-4 * diam;
}

Point random_direction(int dim, Rng& rng) {
  if (dim == 1) return {uniform01(rng) < 0.5 ? -1.0 : 1.0, 0, 0};
  double phi = 2.0 * std::numbers::pi * uniform01(rng);
  if (dim == 2) return {std::cos(phi), std::sin(phi), 0};
  double z = 2.0 * uniform01(rng) - 1.0;
  double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {s * std::cos(phi), s * std::sin(phi), z};
}

struct Moments {
  CompensatedSum sum, sumsq;
  std::size_t n = 0;
};

// Mean and standard error of f(exit point) over `samples` walks from x.
Estimate wos_mean(const Domain& d, const Point& x, const std::function<double(const Point&)>& f,
                  const WosOptions& opts) {
  if (opts.samples < 1) fail(ErrorKind::domain, "walk-on-spheres needs at least one sample");
  const double eps = default_eps(d, opts);
  if (!(eps > 0.0)) fail(ErrorKind::domain, "eps_shell must be positive");
  const std::size_t chunks = (opts.samples + kChunk - 1) / kChunk;
  std::vector<Moments> parts(chunks);
  int threads = opts.threads > 0 ? opts.threads : default_thread_count();
  parallel_for(chunks, threads, [&](std::size_t c) {
    Rng rng(derive_seed(opts.seed, c));
    std::size_t count = std::min(kChunk, opts.samples - c * kChunk);
    Moments& m = parts[c];
    for (std::size_t s = 0; s < count; ++s) {
      Point z = wos_exit_point(d, x, eps, opts.max_steps, rng);
      double v = f(z);
      m.sum.add(v);
      m.sumsq.add(v * v);
      ++m.n;
    }
  });
  CompensatedSum sum, sumsq;
  std::size_t n = 0;
  for (const auto& m : parts) {
    sum.add(m.sum.value());
    sumsq.add(m.sumsq.value());
    n += m.n;
  }
  Estimate e;
  e.samples = n;
  e.seed = opts.seed;
  e.method = "walk_on_spheres";
  e.value = sum.value() / static_cast<double>(n);
  if (n > 1) {
    double var = (sumsq.value() - n * e.value * e.value) / static_cast<double>(n - 1);
    e.std_error = std::sqrt(std::max(0.0, var) / static_cast<double>(n));
  }
  return e;
}

double ball_green(int dim, const Point& c, double R, const Point& o, const Point& x) {
  Point w = x - c, a = o - c;
  if (dim == 1) {
    double lo = c.x - R, hi = c.x + R;
    double h = std::abs(lo - o.x) + (std::abs(hi - o.x) - std::abs(lo - o.x)) * (x.x - lo) / (hi - lo);
    return h - std::abs(x.x - o.x);
  }
  if (dim == 2) {
    // |R^2 - conj(a) w| / (R |w - a|)
    double re = R * R - (a.x * w.x + a.y * w.y);
    double im = -(a.x * w.y - a.y * w.x);
    return std::log(std::hypot(re, im) / (R * distance(w, a)));
  }
  double na = norm(a);
  if (na < 1e-15 * R) return 1.0 / norm(w) - 1.0 / R;
  Point star = a * (R * R / (na * na));
  return 1.0 / distance(w, a) - (R / na) / distance(w, star);
}

}  // namespace

const char* to_string(GreenMethod m) {
  switch (m) {
    case GreenMethod::closed_form: return "closed_form";
    case GreenMethod::walk_on_spheres: return "walk_on_spheres";
    case GreenMethod::grid_dirichlet: return "grid_dirichlet";
  }
  return "?";
}

GreenMethod green_method_from_string(const std::string& s) {
  std::string t = s;
  std::replace(t.begin(), t.end(), '-', '_');
  if (t == "closed_form" || t == "closed") return GreenMethod::closed_form;
  if (t == "walk_on_spheres" || t == "wos") return GreenMethod::walk_on_spheres;
  if (t == "grid_dirichlet" || t == "grid") return GreenMethod::grid_dirichlet;
  fail(ErrorKind::usage, "unknown Green's function method: " + s);
}

bool has_closed_form(const Domain& d) {
  return d.kind() == Domain::Kind::ball || d.kind() == Domain::Kind::half_space;
}

double green_closed_form(const Domain& d, const Point& o, const Point& x) {
  if (!has_closed_form(d)) fail(ErrorKind::domain, "no closed form for a " + d.kind_name() + " domain");
  if (!(d.signed_distance(o) < 0.0)) fail(ErrorKind::domain, "pole must lie strictly inside the domain");
  if (x == o) return kInf;
  if (!(d.signed_distance(x) < 0.0)) return 0.0;
  double g;
  if (d.kind() == Domain::Kind::ball) {
    g = ball_green(d.dim(), d.center(), d.radius(), o, x);
  } else {
    Point n = d.normal();
    Point star = o - n * (2.0 * (dot(n, o) - d.offset()));
    g = kernel_K(d.dim(), x, star) - kernel_K(d.dim(), x, o);
  }
  return std::max(0.0, g);
}

Point wos_exit_point(const Domain& d, const Point& x, double eps_shell, std::size_t max_steps, Rng& rng) {
  Point p = x;
  for (std::size_t step = 0; step < max_steps; ++step) {
    double rho = -d.signed_distance(p);
    if (rho < eps_shell) return d.project_to_boundary(p);
    p = p + random_direction(d.dim(), rng) * rho;
  }
  fail(ErrorKind::estimator, "walk-on-spheres did not reach the boundary shell");
}

Estimate harmonic_measure_integral(const Domain& d, const Point& o, const FieldFn& f, const WosOptions& opts) {
  if (!(d.signed_distance(o) < 0.0)) fail(ErrorKind::domain, "harmonic measure needs an interior point");
  return wos_mean(d, o, f, opts);
}

GreenFunction::GreenFunction(GreenSpec spec) : spec_(std::move(spec)) {
  const Domain& d = spec_.domain;
  if (!(d.signed_distance(spec_.pole) < 0.0)) fail(ErrorKind::domain, "pole must lie strictly inside the domain");
  if (spec_.method == GreenMethod::closed_form && !has_closed_form(d))
    fail(ErrorKind::domain, "no closed form for a " + d.kind_name() + " domain");
  if (spec_.method == GreenMethod::walk_on_spheres && spec_.wos.samples < 1)
    fail(ErrorKind::domain, "walk-on-spheres needs at least one sample");
  if (spec_.method == GreenMethod::grid_dirichlet) {
    const double h = spec_.grid.h;
    if (!(h > 0.0)) fail(ErrorKind::domain, "grid spacing must be positive");
    Grid g = Grid::covering(d.bounding_box().inflated(2 * h, d.dim()), h, d.dim());
    if (static_cast<double>(g.n[0]) * g.n[1] * g.n[2] > 4e7)
      fail(ErrorKind::resolution, "grid_dirichlet grid too large for this domain");
    ScalarField f(g, 0.0);
    Mask inside(g.size(), 0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      Point p = g.point(i);
      if (d.contains(p))
        inside[i] = 1;
      else
        f[i] = kernel_K(d.dim(), d.project_to_boundary(p), spec_.pole);
    }
    RelaxationInfo info;
    auto hf = harmonic_replacement(f, inside, {spec_.grid.tol, 200000}, &info);
    harmonic_part_ = std::make_shared<const ScalarField>(std::move(hf));
  }
}

Estimate GreenFunction::estimate(const Point& x) const {
  const Domain& d = spec_.domain;
  const Point& o = spec_.pole;
  Estimate e;
  e.method = to_string(spec_.method);
  if (x == o) {
    e.value = kInf;
    return e;
  }
  switch (spec_.method) {
    case GreenMethod::closed_form:
      e.value = green_closed_form(d, o, x);
      return e;
    case GreenMethod::walk_on_spheres: {
      e.seed = spec_.wos.seed;
      double sd = d.signed_distance(x);
      if (sd > 0.0) return e;
      if (-sd < default_eps(d, spec_.wos)) {
        e.resolved = has_closed_form(d);
        return e;
      }
      const int dim = d.dim();
      Estimate m = wos_mean(d, x, [&](const Point& z) { return kernel_K(dim, z, o); }, spec_.wos);
      m.value = std::max(0.0, m.value - kernel_K(dim, x, o));
      return m;
    }
    case GreenMethod::grid_dirichlet: {
      if (!d.contains(x)) return e;
      auto h = harmonic_part_->interpolate(x);
      if (!h) fail(ErrorKind::evaluation, "point outside the Dirichlet grid");
      e.value = std::max(0.0, *h - kernel_K(d.dim(), x, o));
      return e;
    }
  }
  return e;
}

FieldFn GreenFunction::as_function() const {
  auto self = std::make_shared<GreenFunction>(*this);
  return [self](const Point& x) { return self->estimate(x).value; };
}

ScalarField GreenFunction::sample(const Grid& grid) const {
  ScalarField out(grid, 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = estimate(grid.point(i)).value;
  return out;
}

double green(const GreenSpec& spec, const Point& x) { return GreenFunction(spec).estimate(x).value; }

Estimate green_estimate(const GreenSpec& spec, const Point& x) { return GreenFunction(spec).estimate(x); }

double green_floor(const GreenSpec& spec, const CompactSet& S, double density) {
  if (!S.interior_contains(spec.pole)) fail(ErrorKind::precondition, "pole must be an interior point of S");
  GreenFunction g(spec);
  auto pts = S.boundary_sample(density);
  if (pts.empty()) fail(ErrorKind::precondition, "empty boundary sample of S");
  double m = kInf;
  for (const auto& p : pts) {
    if (!(spec.domain.signed_distance(p) < 0.0)) fail(ErrorKind::precondition, "S must lie inside the domain");
    m = std::min(m, g.estimate(p).value);
  }
  if (!(m > 0.0)) fail(ErrorKind::consistency, "nonpositive Green floor; S is not compactly inside the domain");
  return m;
}

}  // namespace potkit
