#include "potkit/zeros.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "potkit/errors.hpp"
#include "potkit/green.hpp"
#include "potkit/parallel.hpp"
#include "potkit/rng.hpp"

namespace potkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

Complex horner(const std::vector<Complex>& c, Complex z) {
  Complex acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
  return acc;
}

// Aberth-Ehrlich iteration from points on a circle.
std::vector<Complex> polynomial_roots(const std::vector<Complex>& c) {
  const int n = static_cast<int>(c.size()) - 1;
  std::vector<Complex> out;
  if (n < 1) return out;
  std::vector<Complex> dc(n);
  for (int k = 1; k <= n; ++k) dc[k - 1] = c[k] * static_cast<double>(k);
  double bound = 0.0;
  for (int k = 0; k < n; ++k) bound = std::max(bound, std::abs(c[k] / c[n]));
  const double R = 1.0 + bound;
  out.resize(n);
  for (int k = 0; k < n; ++k) out[k] = std::polar(0.5 * R, 2.0 * kPi * (k + 0.25) / n);
  for (int it = 0; it < 500; ++it) {
    double move = 0.0;
    for (int k = 0; k < n; ++k) {
      Complex p = horner(c, out[k]);
      if (p == 0.0) continue;
      Complex ratio = p / horner(dc, out[k]);
      Complex s = 0.0;
      for (int j = 0; j < n; ++j)
        if (j != k) s += 1.0 / (out[k] - out[j]);
      Complex w = ratio / (1.0 - ratio * s);
      out[k] -= w;
      move = std::max(move, std::abs(w));
    }
    if (move < 1e-15 * R) break;
  }
  return out;
}

// Group approximate roots; a multiple root shows up as a tight cluster.
std::vector<ZeroPoint> cluster_roots(const std::vector<Complex>& roots, double tol) {
  std::vector<ZeroPoint> out;
  std::vector<bool> used(roots.size(), false);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (used[i]) continue;
    Complex sum = roots[i];
    int m = 1;
    used[i] = true;
    for (std::size_t j = i + 1; j < roots.size(); ++j)
      if (!used[j] && std::abs(roots[j] - roots[i]) < tol) {
        used[j] = true;
        sum += roots[j];
        ++m;
      }
    out.push_back({to_point(sum / static_cast<double>(m)), m});
  }
  return out;
}

Complex blaschke_factor(Complex a, Complex z) {
  if (a == 0.0) return z;
  return (std::abs(a) / a) * (a - z) / (1.0 - std::conj(a) * z);
}

void append_zero(std::vector<ZeroPoint>& out, const ZeroPoint& z) {
  for (auto& e : out)
    if (e.point == z.point) {
      e.multiplicity += z.multiplicity;
      return;
    }
  out.push_back(z);
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

}  // namespace

// ---------------------------------------------------------------- ZeroSet

int ZeroSet::total_multiplicity() const {
  int n = 0;
  for (const auto& z : zeros) n += z.multiplicity;
  return n;
}

double ZeroSet::blaschke_sum(std::size_t from) const {
  double s = 0.0;
  for (std::size_t k = from; k < zeros.size(); ++k)
    s += zeros[k].multiplicity * (1.0 - std::hypot(zeros[k].point.x, zeros[k].point.y));
  return s;
}

ZeroSet ZeroSet::prefix(std::size_t K) const {
  ZeroSet out;
  out.zeros.assign(zeros.begin(), zeros.begin() + std::min(K, zeros.size()));
  return out;
}

ZeroSet ZeroSet::read(std::istream& in) {
  ZeroSet Z;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double re, im;
    if (!(ls >> re)) continue;
    int mult = 1;
    if (!(ls >> im)) fail(ErrorKind::usage, "zero file line " + std::to_string(lineno) + ": expected 're im mult'");
    if (!(ls >> mult)) mult = 1;
    std::string extra;
    if (ls >> extra) fail(ErrorKind::usage, "zero file line " + std::to_string(lineno) + ": trailing text");
    if (mult < 1 || !std::isfinite(re) || !std::isfinite(im))
      fail(ErrorKind::usage, "zero file line " + std::to_string(lineno) + ": bad entry");
    Z.zeros.push_back({{re, im}, mult});
  }
  return Z;
}

ZeroSet ZeroSet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::usage, "cannot open zero file '" + path + "'");
  return read(in);
}

void ZeroSet::write(std::ostream& out) const {
  auto flags = out.flags();
  auto prec = out.precision();
  out << std::setprecision(17);
  for (const auto& z : zeros) out << z.point.x << " " << z.point.y << " " << z.multiplicity << "\n";
  out.flags(flags);
  out.precision(prec);
}

// ---------------------------------------------------------------- HoloFunction

HoloFunction HoloFunction::polynomial(std::vector<Complex> coeffs) {
  while (coeffs.size() > 1 && coeffs.back() == 0.0) coeffs.pop_back();
  if (coeffs.empty() || (coeffs.size() == 1 && coeffs[0] == 0.0))
    fail(ErrorKind::precondition, "the zero polynomial has no zero set");
  HoloFunction f;
  f.kind_ = Kind::polynomial;
  f.coeffs_ = coeffs;
  double scale = 0.0;
  for (const auto& c : coeffs) scale = std::max(scale, std::abs(c));
  auto roots = polynomial_roots(coeffs);
  f.roots_ = cluster_roots(roots, 1e-5 * (1.0 + std::sqrt(scale / std::abs(coeffs.back()))));
  return f;
}

HoloFunction HoloFunction::from_roots(const std::vector<ZeroPoint>& roots, Complex lead) {
  HoloFunction f;
  f.kind_ = Kind::polynomial;
  std::vector<Complex> c{lead};
  for (const auto& r : roots) {
    if (r.multiplicity < 1) fail(ErrorKind::precondition, "multiplicities must be positive");
    append_zero(f.roots_, r);
    for (int m = 0; m < r.multiplicity; ++m) {
      std::vector<Complex> next(c.size() + 1, 0.0);
      for (std::size_t k = 0; k < c.size(); ++k) {
        next[k + 1] += c[k];
        next[k] -= c[k] * to_complex(r.point);
      }
      c = std::move(next);
    }
  }
  f.coeffs_ = std::move(c);
  f.lead_ = lead;
  f.factored_ = true;
  return f;
}

HoloFunction HoloFunction::blaschke(const std::vector<ZeroPoint>& zeros, std::size_t truncation) {
  HoloFunction f;
  f.kind_ = Kind::blaschke;
  f.truncation_ = std::min(truncation, zeros.size());
  for (std::size_t k = 0; k < zeros.size(); ++k) {
    const auto& z = zeros[k];
    double r = std::hypot(z.point.x, z.point.y);
    if (!(r < 1.0)) fail(ErrorKind::precondition, "Blaschke zeros must lie in the open unit disc");
    if (z.multiplicity < 1) fail(ErrorKind::precondition, "multiplicities must be positive");
    if (k < f.truncation_)
      f.roots_.push_back(z);
    else
      f.tail_ += z.multiplicity * (1.0 - r);
  }
  return f;
}

HoloFunction HoloFunction::exp_of(const FieldFn& H, const Point& center, double radius, int modes) {
  if (!(radius > 0.0)) fail(ErrorKind::precondition, "exp_of needs a positive radius");
  if (modes < 1) fail(ErrorKind::usage, "exp_of needs at least one mode");
  HoloFunction f;
  f.kind_ = Kind::exp_of;
  f.center_ = to_complex(center);
  f.radius_ = radius;
  const int N = 4 * modes;
  std::vector<double> vals(N);
  for (int j = 0; j < N; ++j) {
    double th = 2.0 * kPi * j / N;
    vals[j] = H({center.x + radius * std::cos(th), center.y + radius * std::sin(th)});
    if (!std::isfinite(vals[j])) fail(ErrorKind::evaluation, "exp_of: H is not finite on the circle");
  }
  f.series_.assign(modes + 1, 0.0);
  for (int n = 0; n <= modes; ++n) {
    Complex s = 0.0;
    for (int j = 0; j < N; ++j) s += vals[j] * std::polar(1.0, -2.0 * kPi * n * j / N);
    f.series_[n] = s / static_cast<double>(N) * (n == 0 ? 1.0 : 2.0);
  }
  return f;
}

HoloFunction HoloFunction::product(std::vector<HoloFunction> factors) {
  HoloFunction f;
  f.kind_ = Kind::product;
  f.factors_ = std::move(factors);
  return f;
}

Complex HoloFunction::operator()(Complex z) const {
  switch (kind_) {
    case Kind::polynomial:
      return horner(coeffs_, z);
    case Kind::blaschke: {
      Complex p = 1.0;
      for (const auto& r : roots_) {
        Complex b = blaschke_factor(to_complex(r.point), z);
        for (int m = 0; m < r.multiplicity; ++m) p *= b;
      }
      return p;
    }
    case Kind::exp_of:
      return std::exp(horner(series_, (z - center_) / radius_));
    case Kind::product: {
      Complex p = 1.0;
      for (const auto& g : factors_) p *= g(z);
      return p;
    }
  }
  return 0.0;
}

double HoloFunction::log_abs(const Point& p) const {
  const Complex z = to_complex(p);
  switch (kind_) {
    case Kind::polynomial: {
      if (factored_) {
        // Factored form is more accurate near the zeros.
        double s = std::log(std::abs(lead_));
        for (const auto& r : roots_) {
          double d = std::abs(z - to_complex(r.point));
          if (d == 0.0) return -kInf;
          s += r.multiplicity * std::log(d);
        }
        return s;
      }
      double a = std::abs(horner(coeffs_, z));
      return a == 0.0 ? -kInf : std::log(a);
    }
    case Kind::blaschke: {
      double s = 0.0;
      for (const auto& r : roots_) {
        double a = std::abs(blaschke_factor(to_complex(r.point), z));
        if (a == 0.0) return -kInf;
        s += r.multiplicity * std::log(a);
      }
      return s;
    }
    case Kind::exp_of:
      return horner(series_, (z - center_) / radius_).real();
    case Kind::product: {
      double s = 0.0;
      for (const auto& g : factors_) {
        double v = g.log_abs(p);
        if (v == -kInf) return -kInf;
        s += v;
      }
      return s;
    }
  }
  return 0.0;
}

std::vector<ZeroPoint> HoloFunction::zeros() const {
  if (kind_ != Kind::product) return roots_;
  std::vector<ZeroPoint> out;
  for (const auto& g : factors_)
    for (const auto& z : g.zeros()) append_zero(out, z);
  return out;
}

int HoloFunction::multiplicity(const Point& p) const {
  const Complex z = to_complex(p);
  switch (kind_) {
    case Kind::polynomial: {
      // Taylor coefficients at z by repeated synthetic division.
      std::vector<Complex> c = coeffs_;
      double scale = 0.0;
      for (const auto& a : c) scale = std::max(scale, std::abs(a));
      double zs = std::max(1.0, std::abs(z));
      scale *= std::pow(zs, static_cast<double>(c.size() - 1));
      for (int k = 0; k + 1 < static_cast<int>(coeffs_.size()); ++k) {
        Complex rem = 0.0;
        std::vector<Complex> q(c.size() > 1 ? c.size() - 1 : 0);
        for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i) {
          rem = rem * z + c[i];
          if (i > 0) q[i - 1] = rem;
        }
        if (std::abs(rem) > 1e-10 * scale) return k;
        c = std::move(q);
      }
      return static_cast<int>(coeffs_.size()) - 1;
    }
    case Kind::blaschke: {
      int m = 0;
      for (const auto& r : roots_)
        if (distance(r.point, p) < 1e-12) m += r.multiplicity;
      return m;
    }
    case Kind::exp_of:
      return 0;
    case Kind::product: {
      int m = 0;
      for (const auto& g : factors_) m += g.multiplicity(p);
      return m;
    }
  }
  return 0;
}

double HoloFunction::tail() const {
  if (kind_ != Kind::product) return tail_;
  double t = 0.0;
  for (const auto& g : factors_) t += g.tail();
  return t;
}

int winding_multiplicity(const HoloFunction& f, const Point& z, double radius, int samples) {
  if (!(radius > 0.0) || samples < 8) fail(ErrorKind::usage, "winding needs a positive radius and >= 8 samples");
  const Complex c = to_complex(z);
  Complex prev = f(c + radius);
  if (prev == 0.0) fail(ErrorKind::resolution, "zero on the winding circle");
  double total = 0.0;
  for (int j = 1; j <= samples; ++j) {
    Complex cur = f(c + std::polar(radius, 2.0 * kPi * j / samples));
    if (cur == 0.0) fail(ErrorKind::resolution, "zero on the winding circle");
    total += std::arg(cur / prev);
    prev = cur;
  }
  double n = total / (2.0 * kPi);
  double rn = std::round(n);
  if (std::abs(n - rn) > 0.1) {
    std::ostringstream os;
    os << "winding count " << n << " is not close to an integer";
    fail(ErrorKind::resolution, os.str());
  }
  return static_cast<int>(rn);
}

// ---------------------------------------------------------------- Poincare-Lelong

PoincareLelongReport poincare_lelong_check(const HoloFunction& f, const Box& box, double h, const RieszOptions& riesz) {
  if (!(h > 0.0)) fail(ErrorKind::usage, "grid spacing must be positive");
  PoincareLelongReport rep;
  rep.h = h;
  const double reach = 5.0 * h;
  std::vector<ZeroPoint> zs;
  for (const auto& z : f.zeros())
    if (box.inflated(-reach - 4.0 * h, 2).contains(z.point, 2)) zs.push_back(z);
  for (std::size_t i = 0; i < zs.size(); ++i)
    for (std::size_t j = i + 1; j < zs.size(); ++j)
      if (distance(zs[i].point, zs[j].point) < 10.0 * h) {
        std::ostringstream os;
        os << "zeros at distance " << distance(zs[i].point, zs[j].point) << " are closer than 10h = " << 10.0 * h;
        fail(ErrorKind::resolution, os.str());
      }
  Grid g = Grid::covering(box, h, 2);
  ScalarField u(g, 0.0, true);
  for (std::size_t i = 0; i < g.size(); ++i) u[i] = f.log_abs(g.point(i));
  DiscreteMeasure mu = riesz_measure(u, riesz);
  rep.total_mass = mu.total_mass();
  for (const auto& z : zs) {
    ZeroMass zm;
    zm.point = z.point;
    zm.multiplicity = z.multiplicity;
    zm.mass = restrict_measure(mu, [&](const Point& p) { return distance(p, z.point) < reach; }).total_mass();
    zm.error = std::abs(zm.mass - z.multiplicity);
    rep.max_error = std::max(rep.max_error, zm.error);
    rep.max_relative_error = std::max(rep.max_relative_error, zm.error / z.multiplicity);
    rep.total_multiplicity += z.multiplicity;
    rep.zeros.push_back(zm);
  }
  return rep;
}

// ---------------------------------------------------------------- margins

const char* to_string(ZeroVariant v) {
  switch (v) {
    case ZeroVariant::Z1:
      return "Z1";
    case ZeroVariant::Z2:
      return "Z2";
    case ZeroVariant::Z3:
      return "Z3";
  }
  return "?";
}

ZeroVariant zero_variant_from_string(const std::string& s) {
  if (s == "Z1" || s == "z1") return ZeroVariant::Z1;
  if (s == "Z2" || s == "z2") return ZeroVariant::Z2;
  if (s == "Z3" || s == "z3") return ZeroVariant::Z3;
  fail(ErrorKind::usage, "unknown zero variant '" + s + "' (Z1, Z2, Z3)");
}

GrowthData growth_zero() {
  GrowthData g;
  g.riesz_plus = DiscreteMeasure(2);
  g.riesz_minus = DiscreteMeasure(2);
  g.M = [](const Point&) { return 0.0; };
  g.zero = true;
  return g;
}

GrowthData growth_from_fields(const ScalarField& M_plus, const ScalarField& M_minus, const RieszOptions& riesz) {
  if (M_plus.dim() != 2 || M_minus.dim() != 2) fail(ErrorKind::precondition, "zero sets live in the plane");
  GrowthData g;
  g.riesz_plus = riesz_measure(M_plus, riesz);
  g.riesz_minus = riesz_measure(M_minus, riesz);
  if (g.riesz_plus.non_subharmonic || g.riesz_minus.non_subharmonic)
    fail(ErrorKind::precondition, "M_+ and M_- must be subharmonic");
  FieldFn a = M_plus.as_function(), b = M_minus.as_function();
  g.M = [a, b](const Point& p) { return a(p) - b(p); };
  return g;
}

namespace {

bool family_fits(ZeroVariant v, TestClass c) {
  switch (v) {
    case ZeroVariant::Z1:
      return c == TestClass::sbh_plus0_circ_r || c == TestClass::sbh_plus0_r || c == TestClass::sbh00_r ||
             c == TestClass::sbh0_plus || c == TestClass::sbh00_plus;
    case ZeroVariant::Z2:
      return c == TestClass::sbh_plus0_r || c == TestClass::sbh00_r || c == TestClass::sbh0_plus ||
             c == TestClass::sbh00_plus;
    case ZeroVariant::Z3:
      return c == TestClass::sbh0_plus || c == TestClass::sbh00_plus;
  }
  return false;
}

}  // namespace

MarginReport zero_margin_check(const ZeroSet& Z, const GrowthData& M, const GluingConfig& cfg, const TestFamily& F,
                               ZeroVariant variant, const ZeroMarginOptions& opts) {
  if (cfg.dim() != 2) fail(ErrorKind::precondition, "zero sets live in the plane");
  if (!family_fits(variant, F.class_tag))
    fail(ErrorKind::usage, std::string("family ") + to_string(F.class_tag) + " does not match variant " +
                               to_string(variant));
  const double band = 4.0 * cfg.r;
  auto off_S = [&](const Point& p) { return cfg.shell_distance(p) > 0.0 && cfg.domain.contains(p); };
  auto off_band = [&](const Point& p) { return cfg.shell_distance(p) >= band && cfg.domain.contains(p); };
  auto in_band = [&](const Point& p) {
    double s = cfg.shell_distance(p);
    return s > 0.0 && s < band && cfg.domain.contains(p);
  };
  std::vector<ZeroPoint> counted;
  for (const auto& z : Z.zeros)
    if (off_S(z.point)) counted.push_back(z);
  DiscreteMeasure delta_M = M.riesz_plus - M.riesz_minus;
  DiscreteMeasure outer = restrict_measure(delta_M, variant == ZeroVariant::Z1 ? Region(off_band) : Region(off_S));
  DiscreteMeasure band_minus = variant == ZeroVariant::Z1 ? restrict_measure(M.riesz_minus, in_band)
                                                          : DiscreteMeasure(2);

  MarginReport rep;
  rep.family = std::string(to_string(F.class_tag)) + (F.smooth ? "~" : "");
  rep.members.resize(F.members.size());
  int threads = opts.margin.threads > 0 ? opts.margin.threads : default_thread_count();
  parallel_for(F.members.size(), threads, [&](std::size_t i) {
    const auto& v = F.members[i];
    auto& out = rep.members[i];
    out.id = v.id;
    try {
      if (!v.eval) fail(ErrorKind::evaluation, "member has no evaluator");
      // Zero atoms are summed in index order; v is evaluated analytically.
      double s = 0.0;
      for (const auto& z : counted) {
        double val = v.eval(z.point);
        if (std::isnan(val)) fail(ErrorKind::evaluation, "member is NaN at a zero");
        s += z.multiplicity * val;
      }
      double a = integrate(v.eval, outer);
      double b = variant == ZeroVariant::Z1 ? integrate([&](const Point& p) { return -v.eval(p); }, band_minus) : 0.0;
      double rhs = a + b;
      if (std::isinf(s) && std::isinf(rhs) && (s > 0) == (rhs > 0)) fail(ErrorKind::evaluation, "margin is inf - inf");
      out.margin = s - rhs;
    } catch (const Error& e) {
      out.failed = true;
      out.error = e.what();
      out.margin = std::numeric_limits<double>::quiet_NaN();
    }
  });
  // Verdict: finiteness, or against the supplied bound.
  rep.max_margin = -kInf;
  rep.linear = opts.margin.linear;
  rep.tol = opts.margin.tol;
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
  double limit = std::isfinite(opts.bound) ? opts.bound + opts.margin.tol : (opts.margin.linear ? opts.margin.tol : kInf);
  bool bad = nan || rep.max_margin == kInf || rep.max_margin > limit;
  rep.verdict = bad ? "violated" : "consistent";
  return rep;
}

double zero_margin_bound(const ZeroSet& Z, const GluingConfig& cfg) {
  if (!has_closed_form(cfg.domain)) fail(ErrorKind::precondition, "the margin bound needs a closed-form domain");
  double gmin = kInf;
  for (const auto& p : cfg.S_o.boundary_sample(512.0 / std::max(cfg.r, 1e-3)))
    gmin = std::min(gmin, green_closed_form(cfg.domain, cfg.o, p));
  if (!(gmin > 0.0) || !std::isfinite(gmin)) fail(ErrorKind::precondition, "S_o touches the boundary");
  double s = 0.0;
  for (const auto& z : Z.zeros)
    if (cfg.shell_distance(z.point) > 0.0) s += z.multiplicity * green_closed_form(cfg.domain, cfg.o, z.point);
  return cfg.b_plus / gmin * s;
}

// ---------------------------------------------------------------- crit3

bool Crit3Report::consistent() const {
  return z1_feasible && z2.consistent() && z3.consistent() && z4.consistent();
}

namespace {

void require_unit_disc(const GluingConfig& cfg) {
  const auto& D = cfg.domain;
  bool ok = D.dim() == 2 && D.kind() == Domain::Kind::ball && distance(D.center(), Point{}) < 1e-12 &&
            std::abs(D.radius() - 1.0) < 1e-12;
  if (!ok) fail(ErrorKind::precondition, "the round trip runs on the unit disc");
}

double local_sup(const HoloFunction& f) {
  double m = 0.0;
  for (int i = 0; i <= 16; ++i)
    for (int j = 0; j < 64; ++j) {
      Complex z = std::polar(0.5 * i / 16.0, 2.0 * kPi * j / 64.0);
      m = std::max(m, std::abs(f(z)));
    }
  return m;
}

}  // namespace

Crit3Report crit3_roundtrip(const ZeroSet& Z, const GrowthData& M, const GluingConfig& cfg, const Crit3Options& opts) {
  cfg.validate();
  require_unit_disc(cfg);
  Crit3Report rep;
  const std::size_t K = opts.truncation == 0 ? Z.zeros.size() : opts.truncation;

  // [z1]: f = B_K exp(H - shift) with H harmonic, |f| <= exp M on the lattice.
  HoloFunction B = HoloFunction::blaschke(Z.zeros, K);
  rep.tail = B.tail();
  Grid g = Grid::covering({{-1, -1, 0}, {1, 1, 0}}, opts.grid_h, 2);
  std::vector<Point> pts;
  for (std::size_t i = 0; i < g.size(); ++i) {
    Point p = g.point(i);
    if (std::hypot(p.x, p.y) < 1.0 - 1e-12) pts.push_back(p);
  }
  std::optional<HoloFunction> E;
  if (!M.zero) {
    if (!M.M) fail(ErrorKind::precondition, "nonzero M needs a field");
    // Harmonic part of M on a slightly smaller circle.
    E = HoloFunction::exp_of(M.M, {0, 0}, 1.0 - 2.0 * opts.grid_h, opts.modes);
    double excess = -kInf;
    for (const auto& p : pts) {
      double m = M.M(p);
      if (!std::isfinite(m)) continue;
      double lf = B.log_abs(p) + E->log_abs(p);
      excess = std::max(excess, lf - m);
    }
    rep.shift = std::max(0.0, excess);
  }
  std::vector<HoloFunction> parts{B};
  if (E) {
    const double shift = rep.shift;
    const FieldFn Mf = M.M;
    parts.push_back(HoloFunction::exp_of([Mf, shift](const Point& p) { return Mf(p) - shift; }, {0, 0},
                                         1.0 - 2.0 * opts.grid_h, opts.modes));
  }
  HoloFunction f = HoloFunction::product(parts);
  rep.z1_excess = -kInf;
  for (const auto& p : pts) {
    double m = M.zero ? 0.0 : M.M(p);
    if (!std::isfinite(m)) continue;
    double lf = f.log_abs(p);
    if (lf == -kInf) continue;
    rep.z1_excess = std::max(rep.z1_excess, std::exp(lf) - std::exp(m));
  }
  rep.z1_feasible = rep.z1_excess <= opts.tol;
  rep.local_sup = local_sup(f);

  // [z2] - [z4]
  ZeroMarginOptions mo;
  mo.margin.threads = opts.family.threads;
  if (M.zero) {
    rep.bound = zero_margin_bound(Z, cfg);
    mo.bound = rep.bound;
  }
  FamilyOptions fo = opts.family;
  fo.smooth = false;
  auto F2 = generate_family(TestClass::sbh_plus0_circ_r, cfg, opts.family_size, derive_seed(opts.seed, 2), fo);
  auto F3 = generate_family(TestClass::sbh_plus0_r, cfg, opts.family_size, derive_seed(opts.seed, 3), fo);
  fo.smooth = true;
  auto F4 = generate_family(TestClass::sbh00_r, cfg, opts.family_size, derive_seed(opts.seed, 4), fo);
  rep.z2 = zero_margin_check(Z, M, cfg, F2, ZeroVariant::Z1, mo);
  rep.z3 = zero_margin_check(Z, M, cfg, F3, ZeroVariant::Z2, mo);
  rep.z4 = zero_margin_check(Z, M, cfg, F4, ZeroVariant::Z2, mo);

  if (!rep.z1_feasible) rep.findings.push_back("[z1] product exceeds exp M on the sample lattice");
  for (const auto* r : {&rep.z2, &rep.z3, &rep.z4})
    if (!r->consistent()) rep.findings.push_back(r->family + " margin " + std::to_string(r->max_margin) + " at " + r->witness);
  return rep;
}

ZeroSweep zero_sweep(const ZeroSet& Z, const std::vector<std::size_t>& Ks, const GluingConfig& cfg,
                     const TestFamily& F, double min_slope, int threads) {
  if (Ks.empty()) fail(ErrorKind::usage, "sweep needs prefix lengths");
  ZeroSweep rep;
  GrowthData M = growth_zero();
  std::vector<double> xs;
  for (std::size_t K : Ks) {
    if (K == 0 || K > Z.zeros.size()) fail(ErrorKind::usage, "prefix length out of range");
    ZeroSet P = Z.prefix(K);
    ZeroMarginOptions mo;
    mo.margin.threads = threads;
    auto m = zero_margin_check(P, M, cfg, F, ZeroVariant::Z3, mo);
    rep.K.push_back(K);
    rep.margins.push_back(m.max_margin);
    rep.local_sup.push_back(local_sup(HoloFunction::blaschke(P.zeros, K)));
    xs.push_back(std::log(static_cast<double>(K)));
  }
  rep.slope = least_squares_slope(xs, rep.margins);
  rep.diverging = rep.slope > min_slope;
  return rep;
}

}  // namespace potkit
