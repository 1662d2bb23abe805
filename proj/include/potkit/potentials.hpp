#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "potkit/fields.hpp"
#include "potkit/geometry.hpp"
#include "potkit/measures.hpp"

namespace potkit {

// pt_mu(y) = int K_{d-2}(x, y) dmu(x), optionally minus K_{d-2}(o, y).
class Potential {
 public:
  Potential() = default;
  explicit Potential(DiscreteMeasure base, std::optional<Point> pole = std::nullopt);

  int dim() const { return base_.dim(); }
  const DiscreteMeasure& base() const { return base_; }
  const std::optional<Point>& pole() const { return pole_; }

  double operator()(const Point& y) const;
  FieldFn as_function() const;
  ScalarField sample(const Grid& grid) const;

 private:
  DiscreteMeasure base_;
  std::optional<Point> pole_;
};

double potential_eval(const Potential& p, const Point& y);

// mu(R^d) k_{d-2}(dist(L, supp mu)); -inf when the distance is 0.
double potential_lower_bound(const DiscreteMeasure& mu, const CompactSet& L);
// The bound above minus k_{d-2}(sup_L |x| + |o|), valid for pt_{mu - delta_o} on L.
double potential_lower_bound_dirac(const DiscreteMeasure& mu, const Point& o, const CompactSet& L);

Potential duality_forward(const DiscreteMeasure& mu, const Point& o);

// Pole-coefficient fit: spherical means of V(y) / (-K(o, y)) at radii r, r/2,
// r/4, extrapolated linearly in 1/(-K(o, y)). For V = c (-K) + bounded the
// limit is the limsup c; the directional sup is reported alongside.
struct PoleFitOptions {
  double r = 0.0;              // 0 selects 0.05 dist(o, dD), floored at 16 h
  std::optional<Domain> domain;  // used for dist(o, dD); grid bounds otherwise
  int directions = 32;
  double spread_tol = 0.05;
  FieldFn near_pole;  // analytic values near o; grid interpolation otherwise
};

struct PoleFit {
  double coefficient = 0.0;  // extrapolated limsup of V / (-K)
  std::vector<double> radii;
  std::vector<double> ratios;
  std::vector<double> sup_ratios;
  double spread = 0.0;  // max residual of the linear fit
};

PoleFit fit_pole_coefficient(const ScalarField& V, const Point& o, const PoleFitOptions& opts = {});

struct DualityOptions {
  PoleFitOptions pole;
  RieszOptions riesz;
  double exclusion = 0.0;  // radius around o left out of the measure; 0 selects 2 h
};

struct DualityResult {
  DiscreteMeasure measure;
  double dirac_coefficient = 0.0;
  PoleFit fit;
};

DualityResult duality_inverse(const ScalarField& V, const Point& o, const DualityOptions& opts = {});

enum class PotentialClass { ASP, ASP1, JP, JP1, none };
const char* to_string(PotentialClass c);

struct ClassifyOptions {
  PoleFitOptions pole;
  double band_width = 0.0;  // 0 selects 3 h
  double zero_tol = 1e-8;
  double pole_tol = 0.05;
  double nonneg_tol = 1e-9;
  std::vector<double> radii;  // subharmonicity radii; empty selects {2h, 4h}
};

struct Classification {
  PotentialClass cls = PotentialClass::none;
  bool vanishes_near_boundary = false;
  double band_max = 0.0;
  bool subharmonic = false;
  std::size_t subharmonic_violations = 0;
  bool pole_upper = false;
  bool pole_two_sided = false;
  bool nonnegative = false;
  double min_value = 0.0;
  PoleFit fit;
  std::string reason;
};

Classification classify_potential(const ScalarField& V, const Domain& domain, const Point& o,
                                  const ClassifyOptions& opts = {});

enum class MeasureVariant { jensen, arens_singer };

struct JensenOptions {
  int probe_count = 64;  // per category
  std::uint64_t seed = 1;
  double tol = 1e-3;
  MeasureVariant variant = MeasureVariant::jensen;
};

struct ProbeMargin {
  std::string id;
  double margin = 0.0;  // int v dmu - v(o); |.| for harmonic probes
};

struct JensenReport {
  MeasureVariant variant = MeasureVariant::jensen;
  std::vector<ProbeMargin> margins;
  double worst_margin = 0.0;
  std::string worst_probe;
  bool passed = false;
  std::uint64_t seed = 0;
  double tol = 0.0;
};

JensenReport jensen_measure_check(const DiscreteMeasure& mu, const Point& o, const Domain& domain,
                                  const JensenOptions& opts = {});

struct PoissonJensenResult {
  double residual = 0.0;
  double u_o = 0.0;
  double integral_u = 0.0;
  double integral_potential = 0.0;
};

// |u(o) - int u dmu + int_{D\o} pt_{mu - delta_o} dDelta_u|. When `potential`
// is given it replaces the quadrature potential of mu.
PoissonJensenResult poisson_jensen_check(const FieldFn& u, const DiscreteMeasure& riesz_u, const DiscreteMeasure& mu,
                                         const Point& o, const FieldFn& potential = {});

}  // namespace potkit
