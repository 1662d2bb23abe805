#include "potkit/gluing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "potkit/errors.hpp"
#include "potkit/potentials.hpp"

namespace potkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string where(const Point& p) {
  std::ostringstream os;
  os << "(" << p.x << ", " << p.y << ", " << p.z << ")";
  return os.str();
}

struct Worst {
  double value = kInf;  // smallest slack seen
  std::size_t cell = 0;
  bool seen = false;
  void take(double slack, std::size_t i) {
    if (!seen || slack < value) {
      value = slack;
      cell = i;
      seen = true;
    }
  }
};

double positive_part(double x) { return x > 0.0 ? x : 0.0; }
double negative_part(double x) { return x < 0.0 ? -x : 0.0; }

double base_tol(const GluingOptions& opts, double h) { return opts.tol > 0.0 ? opts.tol : 5.0 * h; }

std::vector<double> default_radii(const GluingOptions& opts, double h) {
  return opts.radii.empty() ? std::vector<double>{2 * h, 4 * h} : opts.radii;
}

std::vector<double> shell_distances(const GluingConfig& cfg, const Grid& g) {
  std::vector<double> ds(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) ds[i] = cfg.shell_distance(g.point(i));
  return ds;
}

ClauseResult clause(const std::string& id, const Worst& w, const Grid& g, double tol, const std::string& note = {}) {
  ClauseResult c;
  c.id = id;
  c.worst_margin = w.seen ? w.value : 0.0;
  c.location = w.seen ? g.point(w.cell) : Point{};
  c.passed = c.worst_margin >= -tol;
  c.note = note;
  return c;
}

}  // namespace

bool Certificate::passed() const {
  for (const auto& c : clauses)
    if (!c.passed) return false;
  return true;
}

const ClauseResult* Certificate::find(const std::string& id) const {
  for (const auto& c : clauses)
    if (c.id == id) return &c;
  return nullptr;
}

QuantitativeGlue glue_quantitative(const ScalarField& v, const ScalarField& g, const QuantitativeBounds& b,
                                   const GluingOptions& opts) {
  const Grid& grid = v.grid();
  if (g.size() != v.size()) fail(ErrorKind::domain, "v and g live on different grids");
  if (!std::isfinite(b.m_v) || !std::isfinite(b.M_v) || !std::isfinite(b.m_g) || !std::isfinite(b.M_g))
    fail(ErrorKind::gluing_precondition, "gluing bounds must be finite");
  if (!(b.m_g < b.M_g)) fail(ErrorKind::gluing_precondition, "gluing needs m_g < M_g");
  const double tol = base_tol(opts, grid.h);
  const double tol_v = tol * std::max({1.0, std::abs(b.m_v), std::abs(b.M_v)});
  const double tol_g = tol * std::max({1.0, std::abs(b.m_g), std::abs(b.M_g)});

  // Boundary cells of O and O_0 are cells with an axis neighbour on the other side.
  Worst lo_v, hi_v, hi_g, lo_g;
  auto offs = grid.axis_offsets();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    bool inO = v.active(i), in0 = g.active(i);
    if (!inO && !in0) continue;
    auto c = grid.coords(i);
    bool near_0 = false, near_O = false, near_0_only = false, near_O_only = false;
    for (const auto& d : offs) {
      int a = c[0] + d[0], bb = c[1] + d[1], cc = c[2] + d[2];
      if (!grid.in_range(a, bb, cc)) continue;
      std::size_t q = grid.index(a, bb, cc);
      near_0 = near_0 || g.active(q);
      near_O = near_O || v.active(q);
      if (g.active(q) && !v.active(q)) near_0_only = true;
      if (v.active(q) && !g.active(q)) near_O_only = true;
    }
    if (inO && !in0 && near_0) lo_v.take(v[i] - b.m_v, i);  // m_v <= v on O cap dO_0
    if (inO && in0 && near_0_only && std::isfinite(v[i])) hi_v.take(b.M_v - v[i], i);
    if (inO && in0 && near_O_only && g[i] != kInf) hi_g.take(b.m_g - g[i], i);
    if (in0 && !inO && near_O) lo_g.take(g[i] - b.M_g, i);
  }
  auto check = [&](const Worst& w, double t, const char* what) {
    if (w.seen && w.value < -t) {
      std::ostringstream os;
      os << what << " violated by " << -w.value << " at cell " << w.cell << " " << where(grid.point(w.cell));
      fail(ErrorKind::gluing_precondition, os.str());
    }
  };
  check(lo_v, tol_v, "m_v <= v on O cap dO_0");
  check(hi_v, tol_v, "v <= M_v near O_0 cap dO");
  check(hi_g, tol_g, "g <= m_g near O cap dO_0");
  check(lo_g, tol_g, "M_g <= g on O_0 cap dO");

  QuantitativeGlue out;
  out.coefficient = (positive_part(b.M_v) + negative_part(b.m_v)) / (b.M_g - b.m_g);
  out.v0 = ScalarField(grid, 0.0, false);
  out.V = ScalarField(grid, 0.0, false);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (g.active(i)) {
      out.v0.set_active(i, true);
      out.v0[i] = out.coefficient == 0.0 ? 0.0 : out.coefficient * (2.0 * g[i] - b.M_g - b.m_g);
    }
    double val;
    if (g.active(i) && v.active(i))
      val = std::max(v[i], out.v0[i]);
    else if (g.active(i))
      val = out.v0[i];
    else if (v.active(i))
      val = v[i];
    else
      continue;
    if (val == kInf || std::isnan(val)) continue;  // the pole is not part of the glued domain
    out.V[i] = val;
    out.V.set_active(i, true);
  }
  out.subharmonicity = subharmonicity_test(out.V, default_radii(opts, grid.h));
  return out;
}

Domain shell_domain(const GluingConfig& cfg) {
  Domain d = regular_enclosing_domain(cfg.S_o, 2.0 * cfg.r, 3.0 * cfg.r);
  if (d.kind() == Domain::Kind::ball_union && d.balls().size() == 1)
    return Domain::ball(d.dim(), d.balls()[0].center, d.balls()[0].radius);
  return d;
}

GreenFunction make_green(const Domain& D, const Point& o, const GluingOptions& opts) {
  GreenSpec spec;
  spec.domain = D;
  spec.pole = o;
  if (has_closed_form(D)) {
    spec.method = GreenMethod::closed_form;
  } else {
    spec.method = GreenMethod::grid_dirichlet;
    spec.grid = GridDirichletOptions{opts.h, opts.green_grid.tol};
  }
  return GreenFunction(spec);
}

double shell_green_floor(const GluingConfig& cfg, const GluingOptions& opts) {
  Domain Dr = shell_domain(cfg);
  GreenFunction gf = make_green(Dr, cfg.o, opts);
  return green_floor(gf.spec(), cfg.S_o.inflated(2.0 * cfg.r));
}

ShellConstants shell_constants(const ScalarField& v, const GluingConfig& cfg, const GluingOptions& opts) {
  cfg.validate();
  const Grid& g = v.grid();
  Box band = cfg.S_o.bounding_box().inflated(4.0 * cfg.r, cfg.dim());
  Box gb = g.bounds();
  for (int a = 0; a < cfg.dim(); ++a)
    if (band.lo[a] < gb.lo[a] || band.hi[a] > gb.hi[a])
      fail(ErrorKind::precondition, "the band S_o^{4r} \\ S_o leaves the grid");
  ShellConstants out;
  out.M_v = -kInf;
  out.m_v = kInf;
  bool any_band = false, any_ring = false;
  for (std::size_t i = 0; i < g.size(); ++i) {
    Point p = g.point(i);
    double ds = cfg.shell_distance(p);
    if (!(ds > 0.0 && ds < 4.0 * cfg.r)) continue;
    if (!v.active(i)) fail(ErrorKind::precondition, "v is not defined on the band at " + where(p));
    any_band = true;
    out.M_v = std::max(out.M_v, v[i]);
    if (ds >= 2.0 * cfg.r && ds < 3.0 * cfg.r) {
      auto m = try_spherical_mean(v, p, cfg.r);
      if (!m) fail(ErrorKind::precondition, "spherical mean of v leaves the sampled region at " + where(p));
      any_ring = true;
      out.m_v = std::min(out.m_v, *m);
    }
  }
  if (!any_band || !any_ring) fail(ErrorKind::precondition, "the band contains no grid cells; refine h");
  out.D_r = shell_domain(cfg);
  out.M_g = shell_green_floor(cfg, opts);
  return out;
}

GreenGlue glue_with_green(const ScalarField& v, const GluingConfig& cfg, const GluingOptions& opts) {
  ShellConstants sc = shell_constants(v, cfg, opts);
  return glue_with_green(v, cfg, sc, opts);
}

GreenGlue glue_with_green(const ScalarField& v, const GluingConfig& cfg, const ShellConstants& sc,
                          const GluingOptions& opts) {
  cfg.validate();
  const Grid& grid = v.grid();
  const double h = grid.h;
  if (cfg.r < 2.0 * h) fail(ErrorKind::resolution, "r must span at least two grid cells");
  if (!(sc.M_g > 0.0)) fail(ErrorKind::precondition, "M_g must be positive");
  const std::vector<double> ds = shell_distances(cfg, grid);
  const double r = cfg.r;

  GreenGlue out;
  out.constants = sc;

  // (1) harmonic replacement on S_o^{4r} \ clos S_o^{r}.
  Mask shell(grid.size(), 0);
  for (std::size_t i = 0; i < grid.size(); ++i) shell[i] = v.active(i) && ds[i] > r && ds[i] < 4.0 * r;
  RelaxationOptions ro = opts.relax;
  out.v_check = harmonic_replacement(v, shell, ro);

  // (2) gluing against g_{D_r} with S_o^{2r} inside and S_o^{3r} as the outer set, m_g = 0.
  ScalarField outer = out.v_check;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (!(ds[i] > 2.0 * r)) outer.set_active(i, false);
  GreenFunction gr = make_green(sc.D_r, cfg.o, opts);
  ScalarField gfield = gr.sample(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) gfield.set_active(i, ds[i] < 3.0 * r);
  QuantitativeBounds qb{sc.m_v, sc.M_v, 0.0, sc.M_g};
  QuantitativeGlue q = glue_quantitative(outer, gfield, qb, opts);
  out.V = q.V;
  out.coefficient = q.coefficient;
  const double c = q.coefficient;
  const double Mg = sc.M_g;
  const ScalarField Vcopy = out.V;
  out.near_pole = [gr, c, Mg, cfg, Vcopy, r](const Point& x) {
    if (cfg.shell_distance(x) < 2.0 * r) return c == 0.0 ? 0.0 : c * (2.0 * gr(x) - Mg);
    auto val = Vcopy.interpolate(x);
    return val ? *val : std::numeric_limits<double>::quiet_NaN();
  };

  // (3) certificate.
  Certificate& cert = out.certificate;
  const double scale = std::max({1.0, std::abs(sc.M_v), std::abs(sc.m_v)});
  cert.tol = base_tol(opts, h) * scale;
  const double tol = cert.tol;
  const double Mv_plus = positive_part(sc.M_v);
  const ScalarField& V = out.V;

  // h: V > 0 and harmonic on S_o \ o.
  {
    Worst pos;
    ScalarField up(grid, 0.0, false), down(grid, 0.0, false);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!V.active(i)) continue;
      Point p = grid.point(i);
      if (ds[i] == 0.0) pos.take(V[i], i);
      if (ds[i] < 2.0 * r && distance(p, cfg.o) > 3.0 * h) {
        up[i] = V[i];
        down[i] = -V[i];
        up.set_active(i, true);
        down.set_active(i, true);
      }
    }
    auto ru = subharmonicity_test(up, {2 * h});
    auto rd = subharmonicity_test(down, {2 * h});
    ClauseResult cr;
    cr.id = "h";
    cr.location = pos.seen ? grid.point(pos.cell) : Point{};
    cr.worst_margin = std::min({pos.seen ? pos.value : 0.0, ru.worst_margin, rd.worst_margin});
    bool harmonic = ru.violations == 0 && rd.violations == 0;
    if (c > 0.0) {
      cr.passed = harmonic && pos.seen && pos.value > 0.0;
    } else {
      cr.passed = harmonic && pos.seen && pos.value == 0.0;
      cr.note = "zero coefficient: V vanishes on S_o";
    }
    std::ostringstream os;
    if (!cr.note.empty()) os << cr.note << "; ";
    os << "harmonicity tested at " << ru.tested << " cells";
    cr.note = os.str();
    cert.clauses.push_back(cr);
  }
  // =: V = v outside S_o^{4r}.
  {
    Worst eq;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!v.active(i) || ds[i] < 4.0 * r) continue;
      double diff = V.active(i) ? std::abs(V[i] - v[i]) : kInf;
      eq.take(-diff, i);
    }
    ClauseResult cr = clause("=", eq, grid, 0.0);
    cr.passed = !eq.seen || eq.value == 0.0;
    cert.clauses.push_back(cr);
  }
  // +: v <= V <= M_v^+ + 2c g_{D_r} on the band.
  {
    Worst w;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!v.active(i) || !(ds[i] > 0.0 && ds[i] < 4.0 * r)) continue;
      if (!V.active(i)) {
        w.take(-kInf, i);
        continue;
      }
      w.take(V[i] - v[i], i);
      w.take(Mv_plus + 2.0 * c * gfield[i] - V[i], i);
    }
    cert.clauses.push_back(clause("+", w, grid, tol));
  }
  // 0+: 0 < V <= 2c g_{D_r} on S_o \ o.
  {
    Worst w;
    bool strict = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (ds[i] != 0.0 || !V.active(i)) continue;
      if (c > 0.0 && !(V[i] > 0.0)) strict = false;
      w.take(2.0 * c * gfield[i] - V[i], i);
      w.take(V[i], i);
    }
    ClauseResult cr = clause("0+", w, grid, tol);
    cr.passed = cr.passed && strict;
    if (c == 0.0) cr.note = "zero coefficient";
    cert.clauses.push_back(cr);
  }
  // o: V / (-K) -> 2c at the pole.
  {
    ClauseResult cr;
    cr.id = "o";
    cr.location = cfg.o;
    PoleFitOptions po;
    po.domain = cfg.domain;
    po.near_pole = out.near_pole;
    try {
      auto fit = fit_pole_coefficient(V, cfg.o, po);
      double target = 2.0 * c;
      double allowed = 0.05 * std::max(1.0, target);
      cr.worst_margin = allowed - std::abs(fit.coefficient - target);
      cr.passed = cr.worst_margin >= 0.0;
      std::ostringstream os;
      os << "fitted " << fit.coefficient << ", expected " << target;
      cr.note = os.str();
    } catch (const Error& e) {
      cr.passed = false;
      cr.worst_margin = -kInf;
      cr.note = e.what();
    }
    cert.clauses.push_back(cr);
  }
  cert.subharmonicity = q.subharmonicity;
  {
    ClauseResult cr;
    cr.id = "sbh";
    cr.passed = q.subharmonicity.violations == 0;
    cr.worst_margin = q.subharmonicity.worst_margin;
    cr.location = q.subharmonicity.worst_point;
    cr.note = std::to_string(q.subharmonicity.tested) + " sphere tests";
    cert.clauses.push_back(cr);
  }
  return out;
}

TestGlue glue_test_function(const TestFunction& v, const GluingConfig& cfg, const GluingOptions& opts) {
  cfg.validate();
  Grid grid = gluing_grid(cfg, opts.h);
  TestGlue out;
  // The positive class yields Jensen potentials later on; try it first.
  auto mp = verify_membership(v, TestClass::sbh0_plus, cfg, grid);
  if (mp.passed) {
    out.cls = TestClass::sbh0_plus;
  } else {
    auto m = verify_membership(v, TestClass::sbh_plus0_circ_r, cfg, grid);
    if (!m.passed) fail(ErrorKind::precondition, "test function '" + v.id + "' is not in the class: " + m.reason);
  }

  ScalarField f = sample_test_function(v, cfg, grid);
  ShellConstants sc;
  sc.M_v = cfg.b_plus;
  sc.m_v = cfg.b_minus;
  sc.D_r = shell_domain(cfg);
  sc.M_g = shell_green_floor(cfg, opts);
  out.B = 2.0 * (cfg.b_plus - cfg.b_minus) / sc.M_g;
  out.glue = glue_with_green(f, cfg, sc, opts);

  // Bounds against g_D itself and the extension by zero.
  GreenFunction gD = make_green(cfg.domain, cfg.o, opts);
  const ScalarField& V = out.glue.V;
  Certificate& cert = out.glue.certificate;
  Worst plus, zero, pos;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!V.active(i)) continue;
    Point p = grid.point(i);
    double ds = cfg.shell_distance(p);
    if (ds > 0.0 && ds < 4.0 * cfg.r) plus.take(cfg.b_plus + out.B * gD(p) - V[i], i);
    if (!cfg.domain.contains(p)) zero.take(-std::abs(V[i]), i);
    if (out.cls == TestClass::sbh0_plus) pos.take(V[i], i);
  }
  cert.clauses.push_back(clause("+D", plus, grid, cert.tol));
  ClauseResult z = clause("0", zero, grid, 0.0);
  z.passed = !zero.seen || zero.value == 0.0;
  cert.clauses.push_back(z);
  if (out.cls == TestClass::sbh0_plus) cert.clauses.push_back(clause("pos", pos, grid, 0.0));
  return out;
}

FieldFn approx_near_pole(const ApproxSequence& seq, int k) {
  FieldFn near = seq.glue.glue.near_pole;
  double B = seq.B;
  bool positive = seq.glue.cls == TestClass::sbh0_plus;
  return [near, B, k, positive](const Point& x) {
    double val = near(x) - 1.0 / k;
    if (positive) val = std::max(0.0, val);
    return val / B;
  };
}

ApproxSequence potential_approx_sequence(const TestFunction& v, const GluingConfig& cfg, int n,
                                         const GluingOptions& opts) {
  if (n < 1) fail(ErrorKind::precondition, "the sequence length must be positive");
  ApproxSequence out;
  out.glue = glue_test_function(v, cfg, opts);
  out.B = out.glue.B;
  const ScalarField& V = out.glue.glue.V;
  const Grid& grid = V.grid();
  const bool positive = out.glue.cls == TestClass::sbh0_plus;
  std::vector<char> outside(grid.size());
  bool any_outside = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    outside[i] = !cfg.domain.contains(grid.point(i));
    any_outside = any_outside || outside[i];
  }
  if (!any_outside) fail(ErrorKind::construction, "the grid has no cells outside D");

  for (int k = 1; k <= n; ++k) {
    const double cut = 1.0 / k;
    Mask low(grid.size(), 0);
    for (std::size_t i = 0; i < grid.size(); ++i) low[i] = V.active(i) && V[i] < cut;
    // Cells outside D always belong to {V < 1/k} because V vanishes there.
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (outside[i] && V.active(i) && !low[i]) fail(ErrorKind::construction, "V does not vanish outside D");
    ComponentLabels lab = label_components(grid, low);
    std::vector<char> meets(lab.count, 0);
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (lab.label[i] >= 0 && outside[i]) meets[lab.label[i]] = 1;
    ScalarField Vk(grid, 0.0, false);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!V.active(i)) continue;
      Vk.set_active(i, true);
      if (lab.label[i] >= 0 && meets[lab.label[i]]) continue;  // zeroed component
      double val = V[i] - cut;
      if (positive) val = std::max(0.0, val);
      Vk[i] = val / out.B;
    }
    out.V.push_back(std::move(Vk));
  }

  for (int k = 0; k + 1 < n; ++k) {
    std::size_t bad = 0;
    const auto& a = out.V[k];
    const auto& b = out.V[k + 1];
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (a.active(i) && out.B * a[i] > out.B * b[i] + 1e-12 * std::max(1.0, std::abs(out.B * b[i]))) ++bad;
    out.monotonicity_violations.push_back(bad);
  }

  GreenFunction gD = make_green(cfg.domain, cfg.o, opts);
  out.bound_margin = kInf;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Point p = grid.point(i);
    if (!V.active(i) || !(cfg.shell_distance(p) < 4.0 * cfg.r)) continue;
    double bound = cfg.b_plus + out.B * gD(p);
    for (const auto& Vk : out.V) out.bound_margin = std::min(out.bound_margin, bound - out.B * Vk[i]);
  }

  for (int k = 1; k <= n; ++k) {
    ClassifyOptions co;
    co.pole.near_pole = approx_near_pole(out, k);
    auto c = classify_potential(out.V[k - 1], cfg.domain, cfg.o, co);
    out.classes.push_back(to_string(c.cls));
  }
  return out;
}

}  // namespace potkit
