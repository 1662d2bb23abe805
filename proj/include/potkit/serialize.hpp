#pragma once

#include <string>

#include "json.hpp"
#include "potkit/balayage.hpp"
#include "potkit/geometry.hpp"
#include "potkit/gluing.hpp"
#include "potkit/green.hpp"
#include "potkit/measures.hpp"
#include "potkit/potentials.hpp"
#include "potkit/zeros.hpp"

namespace potkit {

// Object keys are kept sorted, so dumps are byte-stable.
using Json = nlohmann::json;

// Non-finite values are written as the strings "inf", "-inf" and "nan".
Json num(double x);
double num_from(const Json& j);

Json point_json(const Point& p, int dim);
Point point_from(const Json& j);
// "x,y" or "x,y,z".
Point parse_point(const std::string& s);
std::vector<double> parse_list(const std::string& s);

// Domain descriptors:
//   disc | ball                     unit ball about the origin (dimension from `dim`)
//   ball:c1,..,cd,R                 annulus:c1,..,cd,r_in,r_out
//   half-space:n1,..,nd,offset      union:c1,..,cd,R;c1,..,cd,R;...
//   <file>.json                     the JSON form written by domain_json
Domain parse_domain(const std::string& spec, int dim = 2);
Json domain_json(const Domain& D);
Domain domain_from(const Json& j);

// Compact sets: point:x,y | ball:c1,..,cd,r | union:...;... | <file>.json
CompactSet parse_compact(const std::string& spec, int dim = 2);
Json compact_json(const CompactSet& S);
CompactSet compact_from(const Json& j);

// Measure files: {"dim": d, "atoms": [{"point": [..], "mass": m}, ...]}.
// Negative masses form the negative part. Density parts are written as atoms.
Json measure_json(const DiscreteMeasure& mu);
DiscreteMeasure measure_from(const Json& j);
DiscreteMeasure load_measure(const std::string& path);
void save_measure(const std::string& path, const DiscreteMeasure& mu);

Json config_json(const GluingConfig& cfg);
GluingConfig config_from(const Json& j);

Json estimate_json(const Estimate& e);
Json margin_json(const MarginReport& rep);
Json sweep_json(const SweepReport& rep);
Json consistency_json(const ConsistencyReport& rep);
Json embedding_json(const EmbeddingReport& rep);
Json certificate_json(const Certificate& c);
Json jensen_json(const JensenReport& rep);
Json classification_json(const Classification& c);
Json poincare_lelong_json(const PoincareLelongReport& rep);
Json crit3_json(const Crit3Report& rep);
Json zero_sweep_json(const ZeroSweep& rep);

// Two-space indentation and a trailing newline.
std::string dump(const Json& j);
Json load_json(const std::string& path);

}  // namespace potkit
