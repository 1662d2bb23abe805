#include "potkit/serialize.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "potkit/errors.hpp"

namespace potkit {

Json num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double num_from(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  fail(ErrorKind::usage, "expected a number, got " + j.dump());
}

Json point_json(const Point& p, int dim) {
  Json a = Json::array();
  for (int i = 0; i < dim; ++i) a.push_back(num(p[i]));
  return a;
}

Point point_from(const Json& j) {
  if (!j.is_array() || j.empty() || j.size() > 3) fail(ErrorKind::usage, "a point is an array of 1 to 3 numbers");
  Point p;
  for (std::size_t i = 0; i < j.size(); ++i) p[static_cast<int>(i)] = num_from(j[i]);
  return p;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      double v = std::stod(item, &used);
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      fail(ErrorKind::usage, "cannot parse '" + item + "' as a number");
    }
  }
  return out;
}

Point parse_point(const std::string& s) {
  auto v = parse_list(s);
  if (v.empty() || v.size() > 3) fail(ErrorKind::usage, "a point is 'x,y' or 'x,y,z', got '" + s + "'");
  Point p;
  for (std::size_t i = 0; i < v.size(); ++i) p[static_cast<int>(i)] = v[i];
  return p;
}

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::pair<std::string, std::string> split_kind(const std::string& spec) {
  auto c = spec.find(':');
  if (c == std::string::npos) return {spec, ""};
  return {spec.substr(0, c), spec.substr(c + 1)};
}

Point head_point(const std::vector<double>& v, int dim) {
  Point p;
  for (int i = 0; i < dim; ++i) p[i] = v[i];
  return p;
}

std::vector<Ball> parse_balls(const std::string& args, int dim) {
  std::vector<Ball> balls;
  std::stringstream ss(args);
  std::string item;
  while (std::getline(ss, item, ';')) {
    auto v = parse_list(item);
    if (static_cast<int>(v.size()) != dim + 1) fail(ErrorKind::usage, "a ball is c1,..,cd,R");
    balls.push_back({head_point(v, dim), v[dim]});
  }
  if (balls.empty()) fail(ErrorKind::usage, "no balls given");
  return balls;
}

Json balls_json(const std::vector<Ball>& balls, int dim) {
  Json a = Json::array();
  for (const auto& b : balls) a.push_back({{"center", point_json(b.center, dim)}, {"radius", num(b.radius)}});
  return a;
}

std::vector<Ball> balls_from(const Json& j) {
  std::vector<Ball> out;
  for (const auto& b : j) out.push_back({point_from(b.at("center")), num_from(b.at("radius"))});
  return out;
}

}  // namespace

Domain parse_domain(const std::string& spec, int dim) {
  if (ends_with(spec, ".json")) return domain_from(load_json(spec));
  auto [kind, args] = split_kind(spec);
  if ((kind == "disc" || kind == "ball") && args.empty()) return Domain::ball(dim, {}, 1.0);
  if (kind == "union") return Domain::ball_union(dim, parse_balls(args, dim));
  auto v = args.empty() ? std::vector<double>{} : parse_list(args);
  if (kind == "ball" || kind == "disc") {
    if (static_cast<int>(v.size()) != dim + 1) fail(ErrorKind::usage, "ball:c1,..,cd,R");
    return Domain::ball(dim, head_point(v, dim), v[dim]);
  }
  if (kind == "annulus") {
    if (static_cast<int>(v.size()) != dim + 2) fail(ErrorKind::usage, "annulus:c1,..,cd,r_in,r_out");
    return Domain::annulus(dim, head_point(v, dim), v[dim], v[dim + 1]);
  }
  if (kind == "half-space" || kind == "half-plane") {
    if (static_cast<int>(v.size()) != dim + 1) fail(ErrorKind::usage, "half-space:n1,..,nd,offset");
    return Domain::half_space(dim, head_point(v, dim), v[dim]);
  }
  fail(ErrorKind::usage, "unknown domain descriptor '" + spec + "'");
}

Json domain_json(const Domain& D) {
  const int d = D.dim();
  Json j{{"dim", d}, {"kind", D.kind_name()}};
  switch (D.kind()) {
    case Domain::Kind::ball:
      j["center"] = point_json(D.center(), d);
      j["radius"] = num(D.radius());
      break;
    case Domain::Kind::annulus:
      j["center"] = point_json(D.center(), d);
      j["inner_radius"] = num(D.inner_radius());
      j["radius"] = num(D.radius());
      break;
    case Domain::Kind::half_space:
      j["normal"] = point_json(D.normal(), d);
      j["offset"] = num(D.offset());
      break;
    case Domain::Kind::ball_union:
      j["balls"] = balls_json(D.balls(), d);
      break;
    case Domain::Kind::implicit:
      j["note"] = "implicit domains are not serializable";
      break;
  }
  return j;
}

Domain domain_from(const Json& j) {
  int d = j.value("dim", 2);
  auto kind = j.at("kind").get<std::string>();
  if (kind == "ball") return Domain::ball(d, point_from(j.at("center")), num_from(j.at("radius")));
  if (kind == "annulus")
    return Domain::annulus(d, point_from(j.at("center")), num_from(j.at("inner_radius")), num_from(j.at("radius")));
  if (kind == "half_space" || kind == "half-space")
    return Domain::half_space(d, point_from(j.at("normal")), num_from(j.at("offset")));
  if (kind == "ball_union" || kind == "union") return Domain::ball_union(d, balls_from(j.at("balls")));
  fail(ErrorKind::usage, "cannot read a domain of kind '" + kind + "'");
}

CompactSet parse_compact(const std::string& spec, int dim) {
  if (ends_with(spec, ".json")) return compact_from(load_json(spec));
  auto [kind, args] = split_kind(spec);
  if (kind == "point") return CompactSet::point(dim, parse_point(args));
  if (kind == "ball" || kind == "disc") {
    auto b = parse_balls(args, dim);
    if (b.size() != 1) fail(ErrorKind::usage, "ball:c1,..,cd,r");
    return CompactSet::ball(dim, b[0].center, b[0].radius);
  }
  if (kind == "union") return CompactSet(dim, parse_balls(args, dim));
  fail(ErrorKind::usage, "unknown compact set descriptor '" + spec + "'");
}

Json compact_json(const CompactSet& S) { return {{"dim", S.dim()}, {"balls", balls_json(S.balls(), S.dim())}}; }

CompactSet compact_from(const Json& j) { return CompactSet(j.value("dim", 2), balls_from(j.at("balls"))); }

namespace {

void part_atoms(const MeasurePart& part, double sign, int dim, Json& out) {
  for (const auto& a : part.atoms)
    out.push_back({{"point", point_json(a.point, dim)}, {"mass", num(sign * a.mass)}});
  if (part.density) {
    const auto& f = *part.density;
    const double vol = f.grid().cell_volume();
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (!f.active(i) || f[i] == 0.0) continue;
      out.push_back({{"point", point_json(f.grid().point(i), dim)}, {"mass", num(sign * f[i] * vol)}});
    }
  }
}

}  // namespace

Json measure_json(const DiscreteMeasure& mu) {
  Json atoms = Json::array();
  part_atoms(mu.positive(), 1.0, mu.dim(), atoms);
  part_atoms(mu.negative(), -1.0, mu.dim(), atoms);
  return {{"atoms", atoms}, {"dim", mu.dim()}};
}

DiscreteMeasure measure_from(const Json& j) {
  int d = j.value("dim", 2);
  std::vector<Atom> atoms;
  for (const auto& a : j.at("atoms")) atoms.push_back({point_from(a.at("point")), num_from(a.at("mass"))});
  return DiscreteMeasure::from_atoms(d, atoms);
}

DiscreteMeasure load_measure(const std::string& path) { return measure_from(load_json(path)); }

void save_measure(const std::string& path, const DiscreteMeasure& mu) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::usage, "cannot write " + path);
  out << dump(measure_json(mu));
}

Json config_json(const GluingConfig& cfg) {
  return {{"S_o", compact_json(cfg.S_o)}, {"b_minus", num(cfg.b_minus)}, {"b_plus", num(cfg.b_plus)},
          {"domain", domain_json(cfg.domain)}, {"o", point_json(cfg.o, cfg.dim())}, {"r", num(cfg.r)}};
}

GluingConfig config_from(const Json& j) {
  GluingConfig cfg;
  cfg.domain = domain_from(j.at("domain"));
  cfg.S_o = compact_from(j.at("S_o"));
  cfg.o = point_from(j.at("o"));
  cfg.r = num_from(j.at("r"));
  cfg.b_minus = num_from(j.at("b_minus"));
  cfg.b_plus = num_from(j.at("b_plus"));
  return cfg;
}

Json estimate_json(const Estimate& e) {
  return {{"method", e.method}, {"resolved", e.resolved}, {"samples", e.samples},
          {"seed", e.seed},     {"std_error", num(e.std_error)}, {"value", num(e.value)}};
}

Json margin_json(const MarginReport& rep) {
  Json members = Json::array();
  for (const auto& m : rep.members) {
    Json e{{"id", m.id}, {"margin", num(m.margin)}};
    if (m.failed) {
      e["failed"] = true;
      e["error"] = m.error;
    }
    members.push_back(e);
  }
  return {{"failed", rep.failed},         {"family", rep.family}, {"linear", rep.linear},
          {"max_margin", num(rep.max_margin)}, {"members", members}, {"size", rep.size},
          {"tol", num(rep.tol)},           {"verdict", rep.verdict}, {"witness", rep.witness}};
}

Json sweep_json(const SweepReport& rep) {
  Json radii = Json::array(), margins = Json::array();
  for (double r : rep.radii) radii.push_back(num(r));
  for (double m : rep.margins) margins.push_back(num(m));
  return {{"diverging", rep.diverging}, {"margins", margins}, {"radii", radii}, {"slope", num(rep.slope)}};
}

Json consistency_json(const ConsistencyReport& rep) {
  Json st = Json::array();
  for (const auto& s : rep.statements) {
    Json e{{"family", s.family}, {"form", s.form}, {"id", s.id}, {"implied", s.implied}, {"verdict", s.verdict}};
    if (s.form != "witness") e["margins"] = margin_json(s.margins);
    if (s.sweep) e["sweep"] = sweep_json(*s.sweep);
    st.push_back(e);
  }
  return {{"findings", rep.findings}, {"statements", st}, {"witness", rep.witness},
          {"witness_margin", num(rep.witness_margin)}};
}

Json embedding_json(const EmbeddingReport& rep) {
  Json inc = Json::array(), dom = Json::array();
  for (const auto& i : rep.inclusions)
    inc.push_back({{"failures", i.failures}, {"first_failure", i.first_failure}, {"from", to_string(i.from)},
                   {"tested", i.tested}, {"to", to_string(i.to)}});
  for (const auto& d : rep.dominance)
    dom.push_back({{"B_prime", num(d.B_prime)}, {"B_second", num(d.B_second)}, {"band_max", num(d.band_max)},
                   {"band_min", num(d.band_min)}, {"class", to_string(d.cls)}, {"failures", d.failures},
                   {"first_failure", d.first_failure}, {"tested", d.tested}, {"worst_excess", num(d.worst_excess)}});
  return {{"dominance", dom}, {"inclusions", inc}, {"passed", rep.passed()}, {"tol", num(rep.tol)}};
}

Json certificate_json(const Certificate& c) {
  Json clauses = Json::array();
  for (const auto& cl : c.clauses)
    clauses.push_back({{"id", cl.id}, {"location", point_json(cl.location, 3)}, {"note", cl.note},
                       {"passed", cl.passed}, {"worst_margin", num(cl.worst_margin)}});
  return {{"clauses", clauses},
          {"passed", c.passed()},
          {"subharmonicity",
           {{"tested", c.subharmonicity.tested},
            {"violations", c.subharmonicity.violations},
            {"worst_margin", num(c.subharmonicity.worst_margin)}}},
          {"tol", num(c.tol)}};
}

Json jensen_json(const JensenReport& rep) {
  Json probes = Json::array();
  for (const auto& m : rep.margins) probes.push_back({{"id", m.id}, {"margin", num(m.margin)}});
  return {{"passed", rep.passed},
          {"probes", probes},
          {"seed", rep.seed},
          {"tol", num(rep.tol)},
          {"variant", rep.variant == MeasureVariant::jensen ? "jensen" : "arens-singer"},
          {"worst_margin", num(rep.worst_margin)},
          {"worst_probe", rep.worst_probe}};
}

Json classification_json(const Classification& c) {
  return {{"band_max", num(c.band_max)},
          {"class", to_string(c.cls)},
          {"min_value", num(c.min_value)},
          {"nonnegative", c.nonnegative},
          {"pole_coefficient", num(c.fit.coefficient)},
          {"pole_two_sided", c.pole_two_sided},
          {"pole_upper", c.pole_upper},
          {"reason", c.reason},
          {"subharmonic", c.subharmonic},
          {"subharmonic_violations", c.subharmonic_violations},
          {"vanishes_near_boundary", c.vanishes_near_boundary}};
}

Json poincare_lelong_json(const PoincareLelongReport& rep) {
  Json zs = Json::array();
  for (const auto& z : rep.zeros)
    zs.push_back({{"error", num(z.error)}, {"mass", num(z.mass)}, {"multiplicity", z.multiplicity},
                  {"point", point_json(z.point, 2)}});
  return {{"h", num(rep.h)},
          {"max_error", num(rep.max_error)},
          {"max_relative_error", num(rep.max_relative_error)},
          {"total_mass", num(rep.total_mass)},
          {"total_multiplicity", rep.total_multiplicity},
          {"zeros", zs}};
}

Json crit3_json(const Crit3Report& rep) {
  return {{"bound", num(rep.bound)},
          {"consistent", rep.consistent()},
          {"findings", rep.findings},
          {"local_sup", num(rep.local_sup)},
          {"shift", num(rep.shift)},
          {"tail", num(rep.tail)},
          {"z1", {{"excess", num(rep.z1_excess)}, {"feasible", rep.z1_feasible}}},
          {"z2", margin_json(rep.z2)},
          {"z3", margin_json(rep.z3)},
          {"z4", margin_json(rep.z4)}};
}

Json zero_sweep_json(const ZeroSweep& rep) {
  Json K = Json::array(), m = Json::array(), s = Json::array();
  for (auto k : rep.K) K.push_back(k);
  for (double v : rep.margins) m.push_back(num(v));
  for (double v : rep.local_sup) s.push_back(num(v));
  return {{"K", K}, {"diverging", rep.diverging}, {"local_sup", s}, {"margins", m}, {"slope", num(rep.slope)}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::usage, "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    fail(ErrorKind::usage, "'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace potkit
