#include "potkit/fields.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "potkit/errors.hpp"
#include "potkit/parallel.hpp"
#include "potkit/quadrature.hpp"

namespace potkit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Stencil {
  std::size_t idx[8];
  double w[8];
  int count = 0;
};

// Corner indices and weights of the interpolation cell containing p.
bool locate(const Grid& g, const Point& p, Stencil& st) {
  int base[3] = {0, 0, 0};
  double frac[3] = {0, 0, 0};
  for (int a = 0; a < g.dim; ++a) {
    double f = (p[a] - g.origin[a]) / g.h;
    if (f < -1e-9 || f > (g.n[a] - 1) + 1e-9) return false;
    int i = static_cast<int>(std::floor(f));
    i = std::clamp(i, 0, std::max(0, g.n[a] - 2));
    base[a] = i;
    frac[a] = std::clamp(f - i, 0.0, 1.0);
    if (g.n[a] == 1) frac[a] = 0.0;
  }
  st.count = 0;
  int corners = 1 << g.dim;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    int off[3] = {0, 0, 0};
    for (int a = 0; a < g.dim; ++a) {
      int bit = (c >> a) & 1;
      off[a] = bit;
      w *= bit ? frac[a] : 1.0 - frac[a];
    }
    if (w == 0.0) continue;
    st.idx[st.count] = g.index(base[0] + off[0], base[1] + off[1], base[2] + off[2]);
    st.w[st.count] = w;
    ++st.count;
  }
  return true;
}

// Neighbour indices along the active axes; false at the grid edge.
bool neighbours(const Grid& g, std::size_t i, std::size_t* out) {
  auto c = g.coords(i);
  int m = 0;
  for (int a = 0; a < g.dim; ++a) {
    int lo[3] = {c[0], c[1], c[2]}, hi[3] = {c[0], c[1], c[2]};
    lo[a] -= 1;
    hi[a] += 1;
    if (!g.in_range(lo[0], lo[1], lo[2]) || !g.in_range(hi[0], hi[1], hi[2])) return false;
    out[m++] = g.index(lo[0], lo[1], lo[2]);
    out[m++] = g.index(hi[0], hi[1], hi[2]);
  }
  return true;
}

}  // namespace

ScalarField::ScalarField(const Grid& grid, double fill, bool active)
    : grid_(grid), values_(grid.size(), fill), mask_(grid.size(), active ? 1 : 0) {
  if (!(grid.h > 0.0)) fail(ErrorKind::domain, "grid spacing must be positive");
}

ScalarField ScalarField::sample(const Grid& grid, const FieldFn& f, const std::function<bool(const Point&)>& active) {
  ScalarField out(grid, 0.0, true);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Point p = grid.point(i);
    if (active && !active(p)) {
      out.mask_[i] = 0;
      continue;
    }
    out.values_[i] = f(p);
  }
  return out;
}

std::optional<double> ScalarField::interpolate(const Point& p) const {
  Stencil st;
  if (!locate(grid_, p, st)) return std::nullopt;
  double sum = 0.0;
  bool pos_inf = false, neg_inf = false;
  for (int c = 0; c < st.count; ++c) {
    if (!mask_[st.idx[c]]) return std::nullopt;
    double v = values_[st.idx[c]];
    if (v == kInf)
      pos_inf = true;
    else if (v == -kInf)
      neg_inf = true;
    else
      sum += st.w[c] * v;
  }
  if (pos_inf && neg_inf) return std::nullopt;
  if (pos_inf) return kInf;
  if (neg_inf) return -kInf;
  return sum;
}

FieldFn ScalarField::as_function() const {
  ScalarField copy = *this;
  return [copy](const Point& p) {
    auto v = copy.interpolate(p);
    return v ? *v : kNaN;
  };
}

ScalarField discrete_laplacian(const ScalarField& f) {
  const Grid& g = f.grid();
  ScalarField out(g, 0.0, false);
  const double inv_h2 = 1.0 / (g.h * g.h);
  std::size_t nb[6];
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!f.active(i) || !std::isfinite(f[i])) continue;
    if (!neighbours(g, i, nb)) continue;
    double s = -2.0 * g.dim * f[i];
    bool ok = true;
    for (int m = 0; m < 2 * g.dim && ok; ++m) {
      if (!f.active(nb[m]) || !std::isfinite(f[nb[m]]))
        ok = false;
      else
        s += f[nb[m]];
    }
    if (!ok) continue;
    out[i] = s * inv_h2;
    out.set_active(i, true);
  }
  return out;
}

SphereRule sphere_rule(int dim, int n_points) {
  SphereRule r;
  if (dim == 1) {
    r.dirs = {Point(-1.0), Point(1.0)};
    r.weights = {0.5, 0.5};
    return r;
  }
  if (dim == 2) {
    int n = std::max(4, n_points);
    for (int j = 0; j < n; ++j) {
      double t = 2.0 * std::numbers::pi * j / n;
      r.dirs.emplace_back(std::cos(t), std::sin(t));
      r.weights.push_back(1.0 / n);
    }
    return r;
  }
  int n_lat = std::max(4, static_cast<int>(std::lround(std::sqrt(n_points / 2.0))));
  int n_lon = 2 * n_lat;
  GaussRule gl = gauss_legendre(n_lat);
  for (int a = 0; a < n_lat; ++a) {
    double z = gl.nodes[a];
    double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    for (int b = 0; b < n_lon; ++b) {
      double t = 2.0 * std::numbers::pi * (b + 0.5 * (a % 2)) / n_lon;
      r.dirs.emplace_back(s * std::cos(t), s * std::sin(t), z);
      r.weights.push_back(0.5 * gl.weights[a] / n_lon);
    }
  }
  return r;
}

std::optional<double> try_spherical_mean(const ScalarField& f, const Point& x, double r, int n_points) {
  SphereRule rule = sphere_rule(f.dim(), n_points);
  double sum = 0.0;
  bool neg_inf = false;
  for (std::size_t j = 0; j < rule.dirs.size(); ++j) {
    auto v = f.interpolate(x + rule.dirs[j] * r);
    if (!v || std::isnan(*v) || *v == kInf) return std::nullopt;
    if (*v == -kInf)
      neg_inf = true;
    else
      sum += rule.weights[j] * *v;
  }
  return neg_inf ? -kInf : sum;
}

double spherical_mean(const ScalarField& f, const Point& x, double r, int n_points) {
  if (!(r > 0.0)) fail(ErrorKind::domain, "spherical mean radius must be positive");
  auto v = try_spherical_mean(f, x, r, n_points);
  if (!v) fail(ErrorKind::precondition, "sphere leaves the active region of the field");
  return *v;
}

double spherical_mean(const FieldFn& f, int dim, const Point& x, double r, int n_points) {
  SphereRule rule = sphere_rule(dim, n_points);
  CompensatedSum s;
  for (std::size_t j = 0; j < rule.dirs.size(); ++j) s.add(rule.weights[j] * f(x + rule.dirs[j] * r));
  return s.value();
}

ScalarField glue_max(const ScalarField& u, const ScalarField& u0, const GlueOptions& opts) {
  const Grid& g = u.grid();
  if (u0.size() != u.size()) fail(ErrorKind::domain, "glue_max fields live on different grids");
  double worst = -kInf;
  std::size_t worst_cell = 0;
  std::size_t nb[6];
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!u0.active(i)) continue;
    if (!u.active(i)) fail(ErrorKind::gluing_precondition, "inner region is not contained in the outer region");
    if (!neighbours(g, i, nb)) continue;
    bool touches = false;
    for (int m = 0; m < 2 * g.dim; ++m)
      if (u.active(nb[m]) && !u0.active(nb[m])) touches = true;
    if (!touches) continue;
    double excess = u0[i] - u[i];
    if (excess > worst) {
      worst = excess;
      worst_cell = i;
    }
  }
  if (worst > opts.tol) {
    Point p = g.point(worst_cell);
    std::ostringstream msg;
    msg << "boundary condition violated by " << worst << " at cell " << worst_cell << " (" << p.x << ", " << p.y
        << ", " << p.z << ")";
    fail(ErrorKind::gluing_precondition, msg.str());
  }
  ScalarField out = u;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (u0.active(i)) out[i] = std::max(u[i], u0[i]);
  return out;
}

SubharmonicityReport subharmonicity_test(const ScalarField& f, const std::vector<double>& radii,
                                         const SubharmonicityOptions& opts) {
  const Grid& g = f.grid();
  const std::size_t n = g.size();
  const double h2 = g.h * g.h;

  // Largest second difference per cell, the local curvature scale.
  std::vector<double> kappa(n, 0.0);
  std::vector<char> pole_near(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!f.active(i)) continue;
    auto c = g.coords(i);
    double k = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      int lo[3] = {c[0], c[1], c[2]}, hi[3] = {c[0], c[1], c[2]};
      lo[a] -= 1;
      hi[a] += 1;
      if (!g.in_range(lo[0], lo[1], lo[2]) || !g.in_range(hi[0], hi[1], hi[2])) continue;
      std::size_t il = g.index(lo[0], lo[1], lo[2]), ih = g.index(hi[0], hi[1], hi[2]);
      if (!f.active(il) || !f.active(ih)) continue;
      double d2 = (f[il] - 2.0 * f[i] + f[ih]) / h2;
      if (std::isfinite(d2)) k = std::max(k, std::abs(d2));
      if (f[il] == -kInf || f[ih] == -kInf) pole_near[i] = 1;
    }
    if (f[i] == -kInf) pole_near[i] = 1;
    kappa[i] = k;
  }
  // Spread the pole flag to the diagonal neighbours as well.
  std::vector<char> excluded(pole_near);
  for (std::size_t i = 0; i < n; ++i) {
    if (!pole_near[i]) continue;
    auto c = g.coords(i);
    for (int dk = (g.dim > 2 ? -1 : 0); dk <= (g.dim > 2 ? 1 : 0); ++dk)
      for (int dj = (g.dim > 1 ? -1 : 0); dj <= (g.dim > 1 ? 1 : 0); ++dj)
        for (int di = -1; di <= 1; ++di)
          if (g.in_range(c[0] + di, c[1] + dj, c[2] + dk)) excluded[g.index(c[0] + di, c[1] + dj, c[2] + dk)] = 1;
  }

  SphereRule rule = sphere_rule(g.dim, opts.sphere_points);
  struct Row {
    std::size_t tested = 0, violations = 0;
    double worst = kInf;
    std::size_t cell = 0;
    double radius = 0.0;
  };
  const std::size_t row_len = static_cast<std::size_t>(g.n[0]);
  const std::size_t rows = n / row_len;
  std::vector<Row> results(rows);
  parallel_for(rows, 0, [&](std::size_t row) {
    Row acc;
    Stencil st;
    for (std::size_t i = row * row_len; i < (row + 1) * row_len; ++i) {
      if (!f.active(i) || excluded[i] || !std::isfinite(f[i])) continue;
      Point x = g.point(i);
      for (double r : radii) {
        double sum = 0.0, kmax = kappa[i];
        bool ok = true;
        for (std::size_t j = 0; j < rule.dirs.size() && ok; ++j) {
          if (!locate(g, x + rule.dirs[j] * r, st)) {
            ok = false;
            break;
          }
          double v = 0.0;
          for (int c = 0; c < st.count; ++c) {
            std::size_t q = st.idx[c];
            if (!f.active(q) || excluded[q] || !std::isfinite(f[q])) {
              ok = false;
              break;
            }
            v += st.w[c] * f[q];
            kmax = std::max(kmax, kappa[q]);
          }
          sum += rule.weights[j] * v;
        }
        if (!ok) continue;
        double tol = opts.tol_factor * h2 * kmax + opts.abs_tol * std::max(1.0, std::abs(f[i]));
        double margin = sum - f[i] + tol;
        ++acc.tested;
        if (margin < 0.0) ++acc.violations;
        if (margin < acc.worst) {
          acc.worst = margin;
          acc.cell = i;
          acc.radius = r;
        }
      }
    }
    results[row] = acc;
  });

  SubharmonicityReport rep;
  rep.worst_margin = kInf;
  for (const auto& r : results) {
    rep.tested += r.tested;
    rep.violations += r.violations;
    if (r.worst < rep.worst_margin) {
      rep.worst_margin = r.worst;
      rep.worst_cell = r.cell;
      rep.worst_radius = r.radius;
    }
  }
  if (rep.tested == 0) rep.worst_margin = 0.0;
  rep.worst_point = g.point(rep.worst_cell);
  return rep;
}

ScalarField harmonic_replacement(const ScalarField& f, const Mask& shell, const RelaxationOptions& opts,
                                 RelaxationInfo* info) {
  const Grid& g = f.grid();
  const int deg = 2 * g.dim;
  std::vector<std::size_t> cells;
  std::vector<std::size_t> nbrs;
  std::size_t nb[6];
  double scale = 1.0;
  int lo[3] = {g.n[0], g.n[1], g.n[2]}, hi[3] = {0, 0, 0};
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!shell[i]) continue;
    if (!f.active(i)) fail(ErrorKind::precondition, "shell leaves the active region");
    if (!neighbours(g, i, nb)) fail(ErrorKind::precondition, "shell touches the grid edge");
    for (int m = 0; m < deg; ++m) {
      if (!f.active(nb[m])) fail(ErrorKind::precondition, "shell is not compactly inside the active region");
      if (!shell[nb[m]]) {
        if (!std::isfinite(f[nb[m]])) fail(ErrorKind::precondition, "boundary data must be finite");
        scale = std::max(scale, std::abs(f[nb[m]]));
      }
      nbrs.push_back(nb[m]);
    }
    cells.push_back(i);
    auto c = g.coords(i);
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], c[a]);
      hi[a] = std::max(hi[a], c[a]);
    }
  }
  ScalarField out = f;
  RelaxationInfo stats;
  if (cells.empty()) {
    if (info) *info = stats;
    return out;
  }
  // Starting guess: mean of the boundary data.
  double mean = 0.0;
  std::size_t cnt = 0;
  for (std::size_t c = 0; c < cells.size(); ++c)
    for (int m = 0; m < deg; ++m) {
      std::size_t q = nbrs[c * deg + m];
      if (!shell[q]) {
        mean += f[q];
        ++cnt;
      }
    }
  mean = cnt ? mean / cnt : 0.0;
  for (std::size_t c : cells) out[c] = mean;

  int extent = 1;
  for (int a = 0; a < g.dim; ++a) extent = std::max(extent, hi[a] - lo[a] + 1);
  const double omega = 2.0 / (1.0 + std::sin(std::numbers::pi / (extent + 1)));
  std::vector<char> color(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto k = g.coords(cells[c]);
    color[c] = static_cast<char>((k[0] + k[1] + k[2]) & 1);
  }
  std::vector<double>& v = out.values();
  const double inv = 1.0 / deg;
  const double target = opts.tol * scale;
  for (std::size_t it = 1; it <= opts.max_iter; ++it) {
    for (char col = 0; col < 2; ++col)
      for (std::size_t c = 0; c < cells.size(); ++c) {
        if (color[c] != col) continue;
        const std::size_t* q = &nbrs[c * deg];
        double s = 0.0;
        for (int m = 0; m < deg; ++m) s += v[q[m]];
        double& x = v[cells[c]];
        x += omega * (s * inv - x);
      }
    if (it % 8 == 0 || it == opts.max_iter) {
      double res = 0.0;
      for (std::size_t c = 0; c < cells.size(); ++c) {
        const std::size_t* q = &nbrs[c * deg];
        double s = 0.0;
        for (int m = 0; m < deg; ++m) s += v[q[m]];
        res = std::max(res, std::abs(s * inv - v[cells[c]]));
      }
      stats.iterations = it;
      stats.residual = res;
      if (res <= target) {
        if (info) *info = stats;
        return out;
      }
    }
  }
  std::ostringstream msg;
  msg << "relaxation did not converge: residual " << stats.residual << " after " << stats.iterations
      << " sweeps";
  fail(ErrorKind::solver, msg.str());
}

// ------------------------------------------------------------------------ IO

void write_field(std::ostream& os, const ScalarField& f) {
  const Grid& g = f.grid();
  os << "potkit-field 1\n";
  os << "dim " << g.dim << "\n";
  os << std::setprecision(17);
  os << "origin " << g.origin.x << ' ' << g.origin.y << ' ' << g.origin.z << "\n";
  os << "spacing " << g.h << "\n";
  os << "extents " << g.n[0] << ' ' << g.n[1] << ' ' << g.n[2] << "\n";
  os << "values\n";
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!f.active(i))
      os << "x\n";
    else if (f[i] == kInf)
      os << "inf\n";
    else if (f[i] == -kInf)
      os << "-inf\n";
    else
      os << f[i] << "\n";
  }
}

ScalarField read_field(std::istream& is) {
  std::string tag;
  int version = 0;
  if (!(is >> tag >> version) || tag != "potkit-field" || version != 1)
    fail(ErrorKind::usage, "not a potkit field dump");
  Grid g;
  std::string key;
  while (is >> key && key != "values") {
    if (key == "dim")
      is >> g.dim;
    else if (key == "origin")
      is >> g.origin.x >> g.origin.y >> g.origin.z;
    else if (key == "spacing")
      is >> g.h;
    else if (key == "extents")
      is >> g.n[0] >> g.n[1] >> g.n[2];
    else
      fail(ErrorKind::usage, "unknown field header key: " + key);
  }
  if (key != "values" || g.dim < 1 || g.dim > 3 || !(g.h > 0.0))
    fail(ErrorKind::usage, "malformed field header");
  ScalarField f(g, 0.0, true);
  std::string tok;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(is >> tok)) fail(ErrorKind::usage, "field payload is truncated");
    if (tok == "x") {
      f.set_active(i, false);
      continue;
    }
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') fail(ErrorKind::usage, "bad field value: " + tok);
    f[i] = v;
  }
  return f;
}

void save_field(const std::string& path, const ScalarField& f) {
  std::ofstream os(path);
  if (!os) fail(ErrorKind::usage, "cannot write " + path);
  write_field(os, f);
}

ScalarField load_field(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorKind::usage, "cannot read " + path);
  return read_field(is);
}

}  // namespace potkit
