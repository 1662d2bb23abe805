// Python bindings. Reports cross the boundary as JSON text; the potkit
// package decodes them into dicts.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "potkit/balayage.hpp"
#include "potkit/errors.hpp"
#include "potkit/gluing.hpp"
#include "potkit/green.hpp"
#include "potkit/kernels.hpp"
#include "potkit/potentials.hpp"
#include "potkit/serialize.hpp"
#include "potkit/zeros.hpp"

namespace py = pybind11;
using namespace potkit;

namespace {

using Pt = std::vector<double>;
using AtomList = std::vector<std::pair<Pt, double>>;
using ZeroList = std::vector<std::tuple<double, double, int>>;

Point to_pt(const Pt& v) {
  if (v.empty() || v.size() > 3) fail(ErrorKind::usage, "points need 1 to 3 coordinates");
  Point p;
  for (std::size_t i = 0; i < v.size(); ++i) p[static_cast<int>(i)] = v[i];
  return p;
}

DiscreteMeasure to_measure(const AtomList& atoms, int dim) {
  DiscreteMeasure mu(dim);
  for (const auto& [p, m] : atoms) mu.add_atom(to_pt(p), m);
  return mu;
}

ZeroSet to_zeros(const ZeroList& z) {
  ZeroSet Z;
  for (const auto& [re, im, m] : z) Z.zeros.push_back({{re, im}, m});
  return Z;
}

GluingConfig make_config(const std::string& domain, const std::string& S, const Pt& o, double r, double b_minus,
                         double b_plus, int dim) {
  GluingConfig cfg;
  cfg.domain = parse_domain(domain, dim);
  cfg.S_o = parse_compact(S, dim);
  cfg.o = to_pt(o);
  cfg.r = r;
  cfg.b_minus = b_minus;
  cfg.b_plus = b_plus;
  cfg.validate();
  return cfg;
}

#define CONFIG_ARGS                                                                                     \
  py::arg("domain") = "disc", py::arg("S") = "ball:0,0,0.25", py::arg("o") = Pt{0, 0}, py::arg("r") = 0.05, \
  py::arg("b_minus") = -1.0, py::arg("b_plus") = 1.0, py::arg("dim") = 2

std::string green_py(const std::vector<Pt>& points, const Pt& pole, const std::string& domain,
                     const std::string& method, std::size_t samples, std::uint64_t seed, int threads, int dim) {
  GreenSpec spec{parse_domain(domain, dim), to_pt(pole), green_method_from_string(method)};
  spec.wos.samples = samples;
  spec.wos.seed = seed;
  spec.wos.threads = threads;
  GreenFunction g(spec);
  Json out = Json::array();
  for (const auto& p : points) {
    Json e = estimate_json(g.estimate(to_pt(p)));
    e["point"] = point_json(to_pt(p), dim);
    out.push_back(e);
  }
  return dump(out);
}

std::string potential_py(const AtomList& atoms, const std::vector<Pt>& points, std::optional<Pt> pole, int dim) {
  std::optional<Point> o;
  if (pole) o = to_pt(*pole);
  Potential P(to_measure(atoms, dim), o);
  Json out = Json::array();
  for (const auto& p : points) out.push_back(num(P(to_pt(p))));
  return dump(out);
}

std::string jensen_py(const AtomList& atoms, const Pt& o, const std::string& domain, const std::string& variant,
                      int probes, std::uint64_t seed, double tol, int dim) {
  JensenOptions jo;
  jo.probe_count = probes;
  jo.seed = seed;
  jo.tol = tol;
  if (variant == "jensen") jo.variant = MeasureVariant::jensen;
  else if (variant == "arens-singer" || variant == "arens_singer") jo.variant = MeasureVariant::arens_singer;
  else fail(ErrorKind::usage, "variant must be jensen or arens-singer");
  return dump(jensen_json(jensen_measure_check(to_measure(atoms, dim), to_pt(o), parse_domain(domain, dim), jo)));
}

std::string duality_py(const AtomList& atoms, const Pt& o, double h, double extent) {
  auto mu = to_measure(atoms, 2);
  Point p = to_pt(o);
  auto P = duality_forward(mu, p);
  Grid g = Grid::covering({{p.x - extent, p.y - extent}, {p.x + extent, p.y + extent}}, h, 2);
  DualityOptions opts;
  opts.pole.near_pole = P.as_function();
  auto res = duality_inverse(P.sample(g), p, opts);
  return dump(Json{{"dirac_coefficient", num(res.dirac_coefficient)},
                   {"total_mass", num(res.measure.total_mass())},
                   {"positive_mass", num(res.measure.positive_mass())},
                   {"negative_mass", num(res.measure.negative_mass())}});
}

TestFamily family(const std::string& cls, const GluingConfig& cfg, int size, std::uint64_t seed, double h,
                  bool smooth) {
  FamilyOptions fo;
  fo.h = h;
  fo.smooth = smooth;
  return generate_family(test_class_from_string(cls), cfg, size, seed, fo);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "potkit core bindings";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(e.numerical() ? PyExc_ArithmeticError : PyExc_ValueError, e.what());
    }
  });

  m.def("k_q", &k_q, py::arg("q"), py::arg("t"));
  m.def("riesz_constant", &riesz_constant, py::arg("d"));
  m.def("ball_volume", &ball_volume, py::arg("p"));
  m.def("sphere_area", &sphere_area, py::arg("p"));

  m.def("green", &green_py, py::arg("points"), py::arg("pole") = Pt{0, 0}, py::arg("domain") = "disc",
        py::arg("method") = "closed_form", py::arg("samples") = 100000, py::arg("seed") = 1, py::arg("threads") = 0,
        py::arg("dim") = 2);
  m.def("potential", &potential_py, py::arg("atoms"), py::arg("points"), py::arg("pole") = std::nullopt,
        py::arg("dim") = 2);
  m.def("jensen_verify", &jensen_py, py::arg("atoms"), py::arg("o") = Pt{0, 0}, py::arg("domain") = "disc",
        py::arg("variant") = "jensen", py::arg("probes") = 64, py::arg("seed") = 1, py::arg("tol") = 1e-3,
        py::arg("dim") = 2);
  m.def("duality_roundtrip", &duality_py, py::arg("atoms"), py::arg("o") = Pt{0, 0}, py::arg("h") = 1.0 / 32,
        py::arg("extent") = 3.0);

  m.def(
      "glue",
      [](const std::string& cls, int member, std::uint64_t seed, double h, const std::string& domain,
         const std::string& S, const Pt& o, double r, double bm, double bp, int dim) {
        auto cfg = make_config(domain, S, o, r, bm, bp, dim);
        auto F = family(cls, cfg, member + 1, seed, h, false);
        GluingOptions go;
        go.h = h;
        auto tg = glue_test_function(F.members.at(member), cfg, go);
        return dump(Json{{"B", num(tg.B)},
                         {"class", to_string(tg.cls)},
                         {"coefficient", num(tg.glue.coefficient)},
                         {"certificate", certificate_json(tg.glue.certificate)}});
      },
      py::arg("cls") = "sbh+0(or)", py::arg("member") = 0, py::arg("seed") = 1, py::arg("h") = 1.0 / 64, CONFIG_ARGS);

  m.def(
      "affine_margin",
      [](const AtomList& theta, const AtomList& mu, const std::string& cls, int size, std::uint64_t seed, double h,
         bool linear, double tol, const std::string& domain, const std::string& S, const Pt& o, double r, double bm,
         double bp, int dim) {
        auto cfg = make_config(domain, S, o, r, bm, bp, dim);
        auto F = family(cls, cfg, size, seed, h, false);
        MarginOptions mo;
        mo.linear = linear;
        mo.tol = tol;
        return dump(margin_json(affine_margin(to_measure(theta, dim), to_measure(mu, dim), F, {}, mo)));
      },
      py::arg("theta"), py::arg("mu"), py::arg("cls") = "G", py::arg("size") = 8, py::arg("seed") = 1,
      py::arg("h") = 1.0 / 48, py::arg("linear") = false, py::arg("tol") = 1e-3, CONFIG_ARGS);

  m.def(
      "poincare_lelong",
      [](const ZeroList& zeros, double h, const std::array<double, 4>& box) {
        auto f = HoloFunction::from_roots(to_zeros(zeros).zeros);
        return dump(poincare_lelong_json(poincare_lelong_check(f, {{box[0], box[1], 0}, {box[2], box[3], 0}}, h)));
      },
      py::arg("zeros"), py::arg("h") = 1.0 / 128, py::arg("box") = std::array<double, 4>{-1, -1, 1, 1});

  m.def(
      "zeros_check",
      [](const ZeroList& zeros, const std::string& variant, const std::string& cls, int size, std::uint64_t seed,
         double h, std::vector<std::size_t> sweep, const std::string& domain, const std::string& S, const Pt& o,
         double r, double bm, double bp, int dim) {
        auto cfg = make_config(domain, S, o, r, bm, bp, dim);
        ZeroSet Z = to_zeros(zeros);
        ZeroVariant v = zero_variant_from_string(variant);
        std::string c = cls;
        if (c.empty()) c = v == ZeroVariant::Z1 ? "sbh+0(or)" : v == ZeroVariant::Z2 ? "sbh+0(r)" : "sbh0+";
        auto F = family(c, cfg, size, seed, h, false);
        ZeroMarginOptions mo;
        mo.bound = zero_margin_bound(Z, cfg);
        Json out{{"bound", num(mo.bound)}, {"margins", margin_json(zero_margin_check(Z, growth_zero(), cfg, F, v, mo))}};
        if (!sweep.empty()) out["sweep"] = zero_sweep_json(zero_sweep(Z, sweep, cfg, F));
        return dump(out);
      },
      py::arg("zeros"), py::arg("variant") = "Z3", py::arg("cls") = "", py::arg("size") = 8, py::arg("seed") = 1,
      py::arg("h") = 1.0 / 64, py::arg("sweep") = std::vector<std::size_t>{}, CONFIG_ARGS);

  m.def(
      "crit3",
      [](const ZeroList& zeros, std::size_t truncation, int size, std::uint64_t seed, double h,
         const std::string& domain, const std::string& S, const Pt& o, double r, double bm, double bp, int dim) {
        auto cfg = make_config(domain, S, o, r, bm, bp, dim);
        Crit3Options co;
        co.truncation = truncation;
        co.family_size = size;
        co.seed = seed;
        co.family.h = h;
        return dump(crit3_json(crit3_roundtrip(to_zeros(zeros), growth_zero(), cfg, co)));
      },
      py::arg("zeros"), py::arg("truncation") = 0, py::arg("size") = 8, py::arg("seed") = 1, py::arg("h") = 1.0 / 64,
      CONFIG_ARGS);
}
