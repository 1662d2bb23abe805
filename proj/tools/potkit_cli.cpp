// potkit command-line tool. Every subcommand prints one JSON report on
// stdout and exits 0 (pass), 1 (violation), 2 (usage/input) or 3 (numerical).
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "potkit/balayage.hpp"
#include "potkit/errors.hpp"
#include "potkit/gluing.hpp"
#include "potkit/green.hpp"
#include "potkit/kernels.hpp"
#include "potkit/potentials.hpp"
#include "potkit/serialize.hpp"
#include "potkit/zeros.hpp"

using namespace potkit;

namespace {

enum Exit { kPass = 0, kViolation = 1, kUsage = 2, kNumerical = 3 };

struct Outcome {
  Json result;
  int code = kPass;
  std::string reason = "pass";
  std::string message;
  std::string csv;  // optional sweep table
};

// ---------------------------------------------------------------- inputs

struct Globals {
  std::uint64_t seed = 1;
  double h = 1.0 / 64;
  double tol = 1e-3;
  int threads = 0;
  std::string out, csv;
  int dim = 2;
};

struct ConfigArgs {
  std::string domain = "disc";
  std::string S = "ball:0,0,0.25";
  std::string o = "0,0";
  double r = 0.05;
  double b_minus = -1.0;
  double b_plus = 1.0;

  GluingConfig build(int dim) const {
    GluingConfig cfg;
    cfg.domain = parse_domain(domain, dim);
    cfg.S_o = parse_compact(S, dim);
    cfg.o = parse_point(o);
    cfg.r = r;
    cfg.b_minus = b_minus;
    cfg.b_plus = b_plus;
    cfg.validate();
    return cfg;
  }
};

void add_config_options(CLI::App* sub, ConfigArgs& c) {
  sub->add_option("--domain", c.domain, "domain descriptor")->capture_default_str();
  sub->add_option("--S", c.S, "compact set S_o")->capture_default_str();
  sub->add_option("--o", c.o, "centre point o")->capture_default_str();
  sub->add_option("--r", c.r, "gluing radius r")->capture_default_str();
  sub->add_option("--b-minus", c.b_minus, "band floor b-")->capture_default_str();
  sub->add_option("--b-plus", c.b_plus, "ceiling b+")->capture_default_str();
}

// Analytic fields: terms joined by '+'.
//   zero | log:c[,a1,..,ad] (c K(., a)) | quad:c (c |x|^2) | linear:a1,..,ad
FieldFn analytic_field(const std::string& spec, int dim) {
  std::vector<FieldFn> terms;
  std::stringstream ss(spec);
  std::string term;
  while (std::getline(ss, term, '+')) {
    auto c = term.find(':');
    std::string kind = term.substr(0, c);
    std::vector<double> v = c == std::string::npos ? std::vector<double>{} : parse_list(term.substr(c + 1));
    if (kind == "zero") {
      terms.push_back([](const Point&) { return 0.0; });
    } else if (kind == "log") {
      if (v.empty()) fail(ErrorKind::usage, "log:c[,a1,..,ad]");
      Point a;
      for (std::size_t i = 1; i < v.size() && i <= 3; ++i) a[static_cast<int>(i - 1)] = v[i];
      double k = v[0];
      terms.push_back([k, a, dim](const Point& x) { return k * kernel_K(dim, x, a); });
    } else if (kind == "quad") {
      if (v.size() != 1) fail(ErrorKind::usage, "quad:c");
      double k = v[0];
      terms.push_back([k](const Point& x) { return k * dot(x, x); });
    } else if (kind == "linear") {
      Point a;
      for (std::size_t i = 0; i < v.size() && i < 3; ++i) a[static_cast<int>(i)] = v[i];
      terms.push_back([a](const Point& x) { return dot(a, x); });
    } else {
      fail(ErrorKind::usage, "unknown field term '" + term + "'");
    }
  }
  if (terms.empty()) fail(ErrorKind::usage, "empty field specification");
  return [terms](const Point& x) {
    double s = 0.0;
    for (const auto& t : terms) s += t(x);
    return s;
  };
}

// A field dump path, or an analytic specification sampled over clos D.
ScalarField field_arg(const std::string& spec, const Domain& D, double h) {
  if (std::filesystem::exists(spec)) return load_field(spec);
  Grid g = Grid::covering(D.bounding_box().inflated(4.0 * h, D.dim()), h, D.dim());
  ScalarField f = ScalarField::sample(g, analytic_field(spec, D.dim()));
  // Poles sampled as -inf stay active; riesz_measure turns them into atoms.
  return f;
}

// Measure file, or dirac:x,.. | sphere:c..,r,n | harmonic:c..,R,n (harmonic measure of the ball for o).
DiscreteMeasure measure_arg(const std::string& spec, int dim, const Point& o) {
  if (std::filesystem::exists(spec)) return load_measure(spec);
  auto c = spec.find(':');
  std::string kind = spec.substr(0, c);
  auto v = c == std::string::npos ? std::vector<double>{} : parse_list(spec.substr(c + 1));
  auto head = [&](std::size_t n) {
    Point p;
    for (int i = 0; i < dim && static_cast<std::size_t>(i) < n; ++i) p[i] = v[i];
    return p;
  };
  const std::size_t d = static_cast<std::size_t>(dim);
  if (kind == "dirac" && v.size() == d) return DiscreteMeasure::dirac(dim, head(d));
  if (kind == "sphere" && v.size() == d + 2) return sphere_measure(dim, head(d), v[d], static_cast<int>(v[d + 1]));
  if (kind == "ball" && v.size() == d + 2)
    return ball_measure(dim, head(d), v[d], static_cast<int>(v[d + 1]), 4 * static_cast<int>(v[d + 1]));
  if (kind == "harmonic" && v.size() == d + 2)
    return ball_harmonic_measure(dim, head(d), v[d], o, static_cast<int>(v[d + 1]));
  fail(ErrorKind::usage, "cannot read measure '" + spec + "' (file, dirac:, sphere:, ball:, harmonic:)");
}

std::vector<Point> points_arg(const std::vector<std::string>& specs) {
  std::vector<Point> out;
  for (const auto& s : specs) {
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ';'))
      if (!item.empty()) out.push_back(parse_point(item));
  }
  return out;
}

std::vector<Complex> complex_list(const std::string& s) {
  std::vector<Complex> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';')) {
    auto v = parse_list(item);
    if (v.empty() || v.size() > 2) fail(ErrorKind::usage, "coefficients are 're[,im];re[,im];...'");
    out.emplace_back(v[0], v.size() > 1 ? v[1] : 0.0);
  }
  return out;
}

GrowthData growth_arg(const std::string& M, const std::string& M_plus, const std::string& M_minus,
                      const Domain& D, double h) {
  if (M == "zero" && M_plus.empty() && M_minus.empty()) return growth_zero();
  if (!M.empty() && M != "zero") {
    ScalarField f = field_arg(M, D, h);
    return growth_from_fields(f, ScalarField(f.grid(), 0.0, true));
  }
  if (M_plus.empty()) fail(ErrorKind::usage, "give --M zero, --M <field>, or --M-plus [--M-minus]");
  ScalarField p = field_arg(M_plus, D, h);
  ScalarField m = M_minus.empty() ? ScalarField(p.grid(), 0.0, true) : field_arg(M_minus, D, h);
  return growth_from_fields(p, m);
}

Region region_arg(const std::string& name, const GluingConfig& cfg) {
  if (name == "all") return {};
  if (name == "off_S") return [cfg](const Point& p) { return cfg.shell_distance(p) > 0.0; };
  if (name == "off_S4r") return [cfg](const Point& p) { return cfg.shell_distance(p) >= 4.0 * cfg.r; };
  if (name == "off_o") return [cfg](const Point& p) { return !(p == cfg.o); };
  fail(ErrorKind::usage, "region is one of all, off_S, off_S4r, off_o");
}

TestFunction member_arg(TestClass cls, const GluingConfig& cfg, std::uint64_t seed, int index, bool smooth,
                        double h) {
  FamilyOptions fo;
  fo.smooth = smooth;
  fo.h = h;
  auto F = generate_family(cls, cfg, index + 1, seed, fo);
  return F.members.back();
}

// ---------------------------------------------------------------- commands

using Runner = std::function<Outcome()>;

Outcome verdict(Json result, bool ok, const std::string& what = {}) {
  Outcome o;
  o.result = std::move(result);
  if (!ok) {
    o.code = kViolation;
    o.reason = "violation";
    o.message = what;
  }
  return o;
}

std::string csv_margins(const MarginReport& rep) {
  std::ostringstream os;
  os << std::setprecision(17) << "member,margin,failed\n";
  for (const auto& m : rep.members) os << m.id << "," << m.margin << "," << (m.failed ? 1 : 0) << "\n";
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"potkit: numerical potential theory and balayage checks"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);
  Globals G;
  if (const char* t = std::getenv("POTKIT_THREADS")) G.threads = std::atoi(t);

  auto add_globals = [&](CLI::App* sub) {
    sub->add_option("--seed", G.seed, "random seed")->capture_default_str();
    sub->add_option("--h", G.h, "grid spacing")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--tol", G.tol, "tolerance")->capture_default_str();
    sub->add_option("--threads", G.threads, "worker threads (not echoed)");
    sub->add_option("--out", G.out, "report path");
    sub->add_option("--csv", G.csv, "CSV path for sweep data");
    sub->add_option("--dim", G.dim, "dimension")->capture_default_str()->check(CLI::Range(1, 3));
  };

  std::map<CLI::App*, Runner> runners;

  // green ---------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("green", "Green's function values");
    add_globals(sub);
    static std::string domain = "disc", pole = "0,0", method;
    static std::vector<std::string> points;
    static std::size_t samples = 100000;
    sub->add_option("--domain", domain)->capture_default_str();
    sub->add_option("--pole", pole)->capture_default_str();
    sub->add_option("--point", points, "evaluation points 'x,y' (repeat or ';'-separate)")->required();
    sub->add_option("--method", method, "closed-form | walk-on-spheres | grid-dirichlet");
    sub->add_option("--samples", samples)->capture_default_str();
    runners[sub] = [&]() {
      GreenSpec spec;
      spec.domain = parse_domain(domain, G.dim);
      spec.pole = parse_point(pole);
      spec.method = method.empty() ? (has_closed_form(spec.domain) ? GreenMethod::closed_form
                                                                   : GreenMethod::walk_on_spheres)
                                   : green_method_from_string(method);
      spec.wos.samples = samples;
      spec.wos.seed = G.seed;
      spec.wos.threads = G.threads;
      spec.grid.h = G.h;
      GreenFunction gf(spec);
      Json vals = Json::array();
      for (const auto& p : points_arg(points))
        vals.push_back({{"estimate", estimate_json(gf.estimate(p))}, {"point", point_json(p, G.dim)}});
      return verdict({{"method", to_string(spec.method)}, {"values", vals}}, true);
    };
  }

  // harmonic-measure -----------------------------------------------------
  {
    auto* sub = app.add_subcommand("harmonic-measure", "integral of a boundary function against harmonic measure");
    add_globals(sub);
    static std::string domain = "disc", pole = "0,0", f = "linear:1,0";
    static std::size_t samples = 100000;
    sub->add_option("--domain", domain)->capture_default_str();
    sub->add_option("--pole", pole)->capture_default_str();
    sub->add_option("--f", f, "boundary function (analytic field spec)")->capture_default_str();
    sub->add_option("--samples", samples)->capture_default_str();
    runners[sub] = [&]() {
      Domain D = parse_domain(domain, G.dim);
      Point o = parse_point(pole);
      FieldFn fn = analytic_field(f, G.dim);
      WosOptions wo;
      wo.samples = samples;
      wo.seed = G.seed;
      wo.threads = G.threads;
      Estimate e = harmonic_measure_integral(D, o, fn, wo);
      Json res{{"estimate", estimate_json(e)}};
      bool ok = true;
      if (D.kind() == Domain::Kind::ball) {
        // Poisson-weight quadrature on the sphere as reference.
        double ref = integrate(fn, ball_harmonic_measure(G.dim, D.center(), D.radius(), o, 4096));
        double z = e.std_error > 0 ? std::abs(e.value - ref) / e.std_error : 0.0;
        res["reference"] = num(ref);
        res["z_score"] = num(z);
        ok = z <= 3.0 || std::abs(e.value - ref) <= G.tol;
      }
      return verdict(res, ok, "estimate is more than 3 standard errors from the Poisson reference");
    };
  }

  // potential ------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("potential", "potentials of measures, classification and duality");
    add_globals(sub);
    static std::string measure, pole, domain = "disc", dump_path, inverse;
    static std::vector<std::string> points;
    static bool classify = false;
    sub->add_option("--measure", measure, "measure file or dirac:/sphere:/ball:/harmonic: spec");
    sub->add_option("--pole", pole, "subtract K(o, .) (pt_{mu - delta_o})");
    sub->add_option("--point", points, "evaluation points");
    sub->add_option("--domain", domain, "domain for classification")->capture_default_str();
    sub->add_flag("--classify", classify, "classify the sampled potential");
    sub->add_option("--dump", dump_path, "write the sampled potential as a field dump");
    sub->add_option("--inverse", inverse, "field dump or spec: recover measure and dirac coefficient");
    runners[sub] = [&]() {
      Domain D = parse_domain(domain, G.dim);
      Json res;
      bool ok = true;
      std::string why;
      if (!inverse.empty()) {
        Point o = pole.empty() ? Point{} : parse_point(pole);
        ScalarField V = field_arg(inverse, D, G.h);
        auto r = duality_inverse(V, o);
        res["inverse"] = {{"dirac_coefficient", num(r.dirac_coefficient)},
                          {"mass", num(r.measure.total_mass())},
                          {"negative_mass", num(r.measure.negative_mass())}};
      }
      if (!measure.empty()) {
        Point o = pole.empty() ? Point{} : parse_point(pole);
        DiscreteMeasure mu = measure_arg(measure, G.dim, o);
        Potential P = pole.empty() ? Potential(mu) : Potential(mu, o);
        Json vals = Json::array();
        for (const auto& p : points_arg(points))
          vals.push_back({{"point", point_json(p, G.dim)}, {"value", num(potential_eval(P, p))}});
        res["values"] = vals;
        res["mass"] = num(mu.total_mass());
        if (classify || !dump_path.empty()) {
          Grid g = Grid::covering(D.bounding_box().inflated(4.0 * G.h, G.dim), G.h, G.dim);
          ScalarField V = P.sample(g);
          for (std::size_t i = 0; i < g.size(); ++i)
            if (!D.contains(g.point(i))) V[i] = 0.0;
          if (!dump_path.empty()) save_field(dump_path, V);
          if (classify) {
            if (pole.empty()) fail(ErrorKind::usage, "--classify needs --pole");
            ClassifyOptions co;
            co.pole.near_pole = P.as_function();
            auto c = classify_potential(V, D, o, co);
            res["classification"] = classification_json(c);
            ok = c.cls != PotentialClass::none;
            why = c.reason;
          }
        }
      } else if (inverse.empty()) {
        fail(ErrorKind::usage, "give --measure or --inverse");
      }
      return verdict(res, ok, why);
    };
  }

  // jensen-verify ----------------------------------------------------------
  {
    auto* sub = app.add_subcommand("jensen-verify", "Jensen / Arens-Singer probe check, Poisson-Jensen residual");
    add_globals(sub);
    static std::string measure, pole = "0,0", domain = "disc", variant = "jensen", u;
    static int probes = 64;
    sub->add_option("--measure", measure)->required();
    sub->add_option("--pole", pole)->capture_default_str();
    sub->add_option("--domain", domain)->capture_default_str();
    sub->add_option("--variant", variant, "jensen | arens-singer")->capture_default_str();
    sub->add_option("--probes", probes)->capture_default_str();
    sub->add_option("--u", u, "also report the Poisson-Jensen residual for this field");
    runners[sub] = [&]() {
      Domain D = parse_domain(domain, G.dim);
      Point o = parse_point(pole);
      DiscreteMeasure mu = measure_arg(measure, G.dim, o);
      JensenOptions jo;
      jo.probe_count = probes;
      jo.seed = G.seed;
      jo.tol = G.tol;
      if (variant == "jensen")
        jo.variant = MeasureVariant::jensen;
      else if (variant == "arens-singer")
        jo.variant = MeasureVariant::arens_singer;
      else
        fail(ErrorKind::usage, "variant is jensen or arens-singer");
      auto rep = jensen_measure_check(mu, o, D, jo);
      Json res{{"report", jensen_json(rep)}};
      bool ok = rep.passed;
      if (!u.empty()) {
        ScalarField f = field_arg(u, D, G.h);
        auto riesz = riesz_measure(f);
        FieldFn fn = std::filesystem::exists(u) ? f.as_function() : analytic_field(u, G.dim);
        auto pj = poisson_jensen_check(fn, restrict_measure(riesz, [&](const Point& p) { return D.contains(p); }),
                                       mu, o);
        res["poisson_jensen"] = {{"integral_potential", num(pj.integral_potential)},
                                 {"integral_u", num(pj.integral_u)},
                                 {"residual", num(pj.residual)},
                                 {"u_o", num(pj.u_o)}};
      }
      return verdict(res, ok, "probe " + rep.worst_probe);
    };
  }

  // glue -----------------------------------------------------------------
  static ConfigArgs cfg_args;
  {
    auto* sub = app.add_subcommand("glue", "glue a test function with Green's function and certify");
    add_globals(sub);
    add_config_options(sub, cfg_args);
    static std::string cls = "sbh+0(or)", v_field, dump_path;
    static int member = 0;
    static bool smooth = false;
    sub->add_option("--class", cls, "test class of the generated member")->capture_default_str();
    sub->add_option("--member", member, "member index in the seeded family")->capture_default_str();
    sub->add_flag("--smooth", smooth);
    sub->add_option("--v", v_field, "glue this field dump instead of a generated member");
    sub->add_option("--dump", dump_path, "write V as a field dump");
    runners[sub] = [&]() {
      GluingConfig cfg = cfg_args.build(G.dim);
      GluingOptions go;
      go.h = G.h;
      Json res;
      GreenGlue glue;
      if (!v_field.empty()) {
        glue = glue_with_green(load_field(v_field), cfg, go);
      } else {
        auto v = member_arg(test_class_from_string(cls), cfg, G.seed, member, smooth, G.h);
        auto tg = glue_test_function(v, cfg, go);
        glue = tg.glue;
        res["B"] = num(tg.B);
        res["member"] = v.id;
      }
      res["coefficient"] = num(glue.coefficient);
      res["constants"] = {{"M_g", num(glue.constants.M_g)},
                          {"M_v", num(glue.constants.M_v)},
                          {"m_v", num(glue.constants.m_v)}};
      res["certificate"] = certificate_json(glue.certificate);
      if (!dump_path.empty()) save_field(dump_path, glue.V);
      std::string failed;
      for (const auto& c : glue.certificate.clauses)
        if (!c.passed) failed += (failed.empty() ? "" : ",") + c.id;
      return verdict(res, glue.certificate.passed(), "failed clauses: " + failed);
    };
  }

  // approx-sequence --------------------------------------------------------
  {
    auto* sub = app.add_subcommand("approx-sequence", "monotone potential approximations of a test function");
    add_globals(sub);
    add_config_options(sub, cfg_args);
    static std::string cls = "sbh+0(or)";
    static int member = 0, n = 8;
    static bool smooth = false;
    sub->add_option("--class", cls)->capture_default_str();
    sub->add_option("--member", member)->capture_default_str();
    sub->add_option("--n", n, "sequence length")->capture_default_str();
    sub->add_flag("--smooth", smooth);
    runners[sub] = [&]() {
      GluingConfig cfg = cfg_args.build(G.dim);
      GluingOptions go;
      go.h = G.h;
      auto v = member_arg(test_class_from_string(cls), cfg, G.seed, member, smooth, G.h);
      auto seq = potential_approx_sequence(v, cfg, n, go);
      std::size_t viol = 0;
      Json mono = Json::array();
      for (auto m : seq.monotonicity_violations) {
        mono.push_back(m);
        viol += m;
      }
      bool classes_ok = true;
      for (const auto& c : seq.classes) classes_ok = classes_ok && (c == "ASP1" || c == "JP1");
      const double tol = seq.glue.glue.certificate.tol;
      bool ok = viol == 0 && classes_ok && seq.bound_margin >= -tol;
      Json res{{"B", num(seq.B)},           {"bound_margin", num(seq.bound_margin)},
               {"classes", seq.classes},    {"member", v.id},
               {"monotonicity_violations", mono}, {"tol", num(tol)}};
      return verdict(res, ok, "monotonicity, class or band bound fails");
    };
  }

  // balayage-check ---------------------------------------------------------
  {
    auto* sub = app.add_subcommand("balayage-check", "affine balayage margins against a test family");
    add_globals(sub);
    add_config_options(sub, cfg_args);
    static std::string theta, mu, cls = "G", region = "all";
    static int size = 12;
    static bool smooth = false, linear = false, sweep = false, embedding = false;
    sub->add_option("--theta", theta, "left measure");
    sub->add_option("--mu", mu, "right measure");
    sub->add_option("--class", cls)->capture_default_str();
    sub->add_option("--size", size)->capture_default_str();
    sub->add_option("--region", region, "all | off_S | off_S4r | off_o")->capture_default_str();
    sub->add_flag("--smooth", smooth);
    sub->add_flag("--linear", linear, "verdict against tol instead of finiteness");
    sub->add_flag("--sweep", sweep, "Green's function sweep towards dD");
    sub->add_flag("--embedding", embedding, "run the inclusion and dominance checks instead");
    runners[sub] = [&]() {
      GluingConfig cfg = cfg_args.build(G.dim);
      FamilyOptions fo;
      fo.smooth = smooth;
      fo.threads = G.threads;
      if (embedding) {
        auto rep = embedding_check(cfg, G.seed, {}, fo);
        return verdict({{"embedding", embedding_json(rep)}}, rep.passed(), "inclusion or dominance failure");
      }
      if (theta.empty() || mu.empty()) fail(ErrorKind::usage, "give --theta and --mu (or --embedding)");
      DiscreteMeasure t = measure_arg(theta, G.dim, cfg.o), m = measure_arg(mu, G.dim, cfg.o);
      auto F = generate_family(test_class_from_string(cls), cfg, size, G.seed, fo);
      MarginOptions mo;
      mo.linear = linear;
      mo.tol = G.tol;
      mo.threads = G.threads;
      Region reg = region_arg(region, cfg);
      auto rep = affine_margin(t, m, F, reg, mo);
      Json res{{"margins", margin_json(rep)}};
      bool ok = rep.consistent();
      Outcome out;
      std::string csv = csv_margins(rep);
      if (sweep) {
        auto sw = green_sweep(t, m, cfg, reg);
        res["sweep"] = sweep_json(sw);
        ok = ok && !sw.diverging;
        std::ostringstream os;
        os << std::setprecision(17) << "radius,margin\n";
        for (std::size_t i = 0; i < sw.radii.size(); ++i) os << sw.radii[i] << "," << sw.margins[i] << "\n";
        csv = os.str();
      }
      out = verdict(res, ok, "margin unbounded (witness " + rep.witness + ")");
      out.csv = csv;
      return out;
    };
  }

  // crit-consistency -------------------------------------------------------
  {
    auto* sub = app.add_subcommand("crit-consistency", "forward consistency of the balayage criteria for u <= M + h");
    add_globals(sub);
    add_config_options(sub, cfg_args);
    static std::string u, M, h;
    static int size = 12;
    sub->add_option("--u", u, "field dump or spec")->required();
    sub->add_option("--M", M, "field dump or spec")->required();
    sub->add_option("--witness", h, "harmonic or subharmonic witness h with u + h <= M");
    sub->add_option("--size", size, "family size")->capture_default_str();
    runners[sub] = [&]() {
      GluingConfig cfg = cfg_args.build(G.dim);
      ScalarField fu = field_arg(u, cfg.domain, G.h), fM = field_arg(M, cfg.domain, G.h);
      std::optional<ScalarField> fh;
      if (!h.empty()) fh = field_arg(h, cfg.domain, G.h);
      auto in = consistency_input(fu, fM, fh);
      ConsistencyOptions co;
      co.family_size = size;
      co.seed = G.seed;
      co.family.threads = G.threads;
      co.margin.threads = G.threads;
      co.margin.tol = G.tol;
      auto rep = crit_consistency(in, cfg, co);
      std::string witness;
      for (const auto& s : rep.statements)
        if (s.verdict == "violated") {
          witness = s.id + (s.sweep && s.sweep->diverging ? " (divergent sweep)" : " (" + s.margins.witness + ")");
          break;
        }
      Outcome out = verdict({{"report", consistency_json(rep)}}, !rep.any_violated(), witness);
      out.csv = consistency_csv(rep);
      return out;
    };
  }

  // pl-check -------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("pl-check", "Riesz mass of ln|f| against zero multiplicities");
    add_globals(sub);
    static std::string coeffs, zeros, box = "-1,-1,1,1";
    static double max_rel = 0.05;
    sub->add_option("--coeffs", coeffs, "polynomial coefficients 're[,im];...' from degree 0");
    sub->add_option("--zeros", zeros, "zero file ('re im mult' lines) for a polynomial with these roots");
    sub->add_option("--box", box, "xlo,ylo,xhi,yhi")->capture_default_str();
    sub->add_option("--max-relative-error", max_rel)->capture_default_str();
    runners[sub] = [&]() {
      if (coeffs.empty() == zeros.empty()) fail(ErrorKind::usage, "give exactly one of --coeffs and --zeros");
      HoloFunction f = coeffs.empty() ? HoloFunction::from_roots(ZeroSet::load(zeros).zeros)
                                      : HoloFunction::polynomial(complex_list(coeffs));
      auto b = parse_list(box);
      if (b.size() != 4) fail(ErrorKind::usage, "--box xlo,ylo,xhi,yhi");
      auto rep = poincare_lelong_check(f, {{b[0], b[1], 0}, {b[2], b[3], 0}}, G.h);
      return verdict({{"report", poincare_lelong_json(rep)}}, rep.max_relative_error <= max_rel,
                     "mass differs from multiplicity");
    };
  }

  // zeros-check ------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("zeros-check", "zero-set margins for a variant of the holomorphic criterion");
    add_globals(sub);
    add_config_options(sub, cfg_args);
    static std::string variant = "Z3", zeros, M = "zero", M_plus, M_minus, cls;
    static int size = 8;
    static bool smooth = false, no_bound = false;
    static std::vector<std::size_t> sweep;
    sub->add_option("--variant", variant, "Z1 | Z2 | Z3")->capture_default_str();
    sub->add_option("--zeros", zeros, "zero file")->required();
    sub->add_option("--M", M, "zero, or a field for M = M_+")->capture_default_str();
    sub->add_option("--M-plus", M_plus);
    sub->add_option("--M-minus", M_minus);
    sub->add_option("--class", cls, "family class (defaults per variant)");
    sub->add_option("--size", size)->capture_default_str();
    sub->add_flag("--smooth", smooth);
    sub->add_flag("--no-bound", no_bound, "for M = 0, test finiteness only");
    sub->add_option("--sweep", sweep, "prefix lengths K for a Z3 sweep");
    runners[sub] = [&]() {
      GluingConfig cfg = cfg_args.build(2);
      ZeroSet Z = ZeroSet::load(zeros);
      ZeroVariant v = zero_variant_from_string(variant);
      std::string M_spec = (!M_plus.empty() || !M_minus.empty()) && M == "zero" ? std::string() : M;
      GrowthData gd = growth_arg(M_spec, M_plus, M_minus, cfg.domain, G.h);
      TestClass tag = !cls.empty() ? test_class_from_string(cls)
                      : v == ZeroVariant::Z1 ? TestClass::sbh_plus0_circ_r
                      : v == ZeroVariant::Z2 ? TestClass::sbh_plus0_r
                                             : TestClass::sbh0_plus;
      FamilyOptions fo;
      fo.smooth = smooth;
      fo.threads = G.threads;
      auto F = generate_family(tag, cfg, size, G.seed, fo);
      ZeroMarginOptions mo;
      mo.margin.tol = G.tol;
      mo.margin.threads = G.threads;
      if (gd.zero && !no_bound && has_closed_form(cfg.domain)) mo.bound = zero_margin_bound(Z, cfg);
      auto rep = zero_margin_check(Z, gd, cfg, F, v, mo);
      Json res{{"bound", num(mo.bound)}, {"margins", margin_json(rep)}, {"variant", to_string(v)}};
      bool ok = rep.consistent();
      Outcome out;
      out.csv = csv_margins(rep);
      if (!sweep.empty()) {
        auto P = generate_family(tag == TestClass::sbh00_plus ? tag : TestClass::sbh0_plus, cfg, size, G.seed, fo);
        auto sw = zero_sweep(Z, sweep, cfg, P, 0.5, G.threads);
        res["sweep"] = zero_sweep_json(sw);
        ok = ok && !sw.diverging;
        std::ostringstream os;
        os << std::setprecision(17) << "K,margin,local_sup\n";
        for (std::size_t i = 0; i < sw.K.size(); ++i)
          os << sw.K[i] << "," << sw.margins[i] << "," << sw.local_sup[i] << "\n";
        out.csv = os.str();
      }
      std::string csv = out.csv;
      out = verdict(res, ok, "margin exceeds the bound or grows with K (witness " + rep.witness + ")");
      out.csv = csv;
      return out;
    };
  }

  // crit3 ----------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("crit3", "zero-set round trip on the unit disc");
    add_globals(sub);
    add_config_options(sub, cfg_args);
    static std::string zeros, M = "zero", M_plus, M_minus;
    static std::size_t truncation = 0;
    static int size = 8;
    sub->add_option("--zeros", zeros, "zero file")->required();
    sub->add_option("--M", M)->capture_default_str();
    sub->add_option("--M-plus", M_plus);
    sub->add_option("--M-minus", M_minus);
    sub->add_option("--truncation", truncation, "Blaschke factors kept (0 = all)")->capture_default_str();
    sub->add_option("--size", size)->capture_default_str();
    runners[sub] = [&]() {
      GluingConfig cfg = cfg_args.build(2);
      ZeroSet Z = ZeroSet::load(zeros);
      std::string M_spec = (!M_plus.empty() || !M_minus.empty()) && M == "zero" ? std::string() : M;
      GrowthData gd = growth_arg(M_spec, M_plus, M_minus, cfg.domain, G.h);
      Crit3Options co;
      co.truncation = truncation;
      co.family_size = size;
      co.seed = G.seed;
      co.family.threads = G.threads;
      co.grid_h = G.h;
      auto rep = crit3_roundtrip(Z, gd, cfg, co);
      std::string why;
      for (const auto& f : rep.findings) why += (why.empty() ? "" : "; ") + f;
      return verdict({{"report", crit3_json(rep)}}, rep.consistent(), why);
    };
  }

  Json report;
  int code = kPass;
  CLI::App* active = nullptr;
  try {
    app.parse(argc, argv);
    active = app.get_subcommands().front();
    Outcome o = runners.at(active)();
    report["result"] = o.result;
    code = o.code;
    report["reason"] = o.reason;
    if (!o.message.empty()) report["message"] = o.message;
    if (!o.csv.empty()) {
      std::string path = G.csv;
      if (path.empty())
        if (const char* dir = std::getenv("POTKIT_OUTPUT_DIR"))
          path = (std::filesystem::path(dir) / (active->get_name() + ".csv")).string();
      if (!path.empty()) {
        std::ofstream cs(path);
        if (!cs) fail(ErrorKind::usage, "cannot write " + path);
        cs << o.csv;
      }
    }
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    report["reason"] = "usage";
    report["message"] = e.what();
    code = kUsage;
  } catch (const Error& e) {
    report["reason"] = to_string(e.kind());
    report["message"] = e.what();
    code = e.numerical() ? kNumerical : kUsage;
  } catch (const Json::exception& e) {
    report["reason"] = "usage";
    report["message"] = e.what();
    code = kUsage;
  } catch (const std::exception& e) {
    report["reason"] = "evaluation";
    report["message"] = e.what();
    code = kNumerical;
  }

  if (active) {
    report["command"] = active->get_name();
    Json cfg;
    for (const auto* opt : active->get_options()) {
      std::string name = opt->get_name(false, true);
      if (name.rfind("--", 0) != 0 || name == "--help" || name == "--threads" || name == "--out" || name == "--csv")
        continue;
      auto res = opt->reduced_results();
      if (!res.empty())
        cfg[name.substr(2)] = res.size() == 1 ? Json(res[0]) : Json(res);
      else if (!opt->get_default_str().empty())
        cfg[name.substr(2)] = opt->get_default_str();
    }
    report["config"] = cfg;
  }
  report["exit_code"] = code;
  std::string text = dump(report);
  std::cout << text;
  std::string out = G.out;
  if (out.empty() && active)
    if (const char* dir = std::getenv("POTKIT_OUTPUT_DIR"))
      out = (std::filesystem::path(dir) / (active->get_name() + ".json")).string();
  if (!out.empty()) {
    std::ofstream os(out);
    if (!os) {
      std::cerr << "cannot write " << out << "\n";
      return kUsage;
    }
    os << text;
  }
  return code;
}
