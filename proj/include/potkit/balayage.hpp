#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "potkit/fields.hpp"
#include "potkit/measures.hpp"
#include "potkit/testfn.hpp"

namespace potkit {

using Region = std::function<bool(const Point&)>;

// Radial measure on the shell a < |x - c| < b with a C^inf bump profile in
// |x - c|, normalised to mass 1. Its potential is k(max(rho, t)) averaged over
// the profile, so pt - K(c, .) vanishes off B(c, b) and is -K + const on B(c, a).
class RadialBump {
 public:
  RadialBump() = default;
  RadialBump(int dim, const Point& c, double a, double b);
  const Point& center() const { return c_; }
  double inner() const { return a_; }
  double outer() const { return b_; }
  double potential(const Point& y) const;
  // pt - K(c, .): nonnegative, +inf at c.
  double green_like(const Point& y) const;
  // Lebesgue density of the measure.
  double density(const Point& x) const;

 private:
  double profile(double rho) const;
  int dim_ = 2;
  Point c_;
  double a_ = 0.0, b_ = 0.0, norm_ = 1.0, inner_value_ = 0.0;
};

// Measure with density f sampled at the centres of a lattice of spacing hq
// over `box`; renormalised to mass 1.
DiscreteMeasure density_measure(int dim, const std::function<double(const Point&)>& f, const Box& box, double hq);

struct FamilyOptions {
  double h = 0.0;          // verification lattice; 0 selects dist(o, dD) / 64
  bool smooth = false;     // C^inf subfamily
  bool verify = true;
  int max_attempts = 8;    // regenerations per member before giving up
  int threads = 0;
  int measure_points = 256;
  std::vector<double> radii;  // G: explicit fractions of dist(o, dD)
  MembershipOptions membership;
};

struct TestFamily {
  TestClass class_tag = TestClass::G;
  bool smooth = false;
  std::vector<TestFunction> members;
  GluingConfig cfg;
  std::uint64_t seed = 0;
  std::size_t regenerated = 0;
};

TestFamily generate_family(TestClass tag, const GluingConfig& cfg, int count, std::uint64_t seed,
                           const FamilyOptions& opts = {});

struct MemberMargin {
  std::string id;
  double margin = 0.0;
  bool failed = false;
  std::string error;
};

struct MarginReport {
  std::string family;
  std::size_t size = 0;
  std::vector<MemberMargin> members;
  double max_margin = 0.0;
  std::string witness;  // member attaining the max
  std::size_t failed = 0;
  bool linear = false;
  double tol = 0.0;
  std::string verdict;  // consistent | violated
  bool consistent() const { return verdict == "consistent"; }
};

struct MarginOptions {
  bool linear = false;  // verdict against tol instead of finiteness
  double tol = 1e-3;
  int threads = 0;
};

// sup over v in F of int_{region_theta} v dtheta - int_{region_mu} v dmu.
MarginReport affine_margin(const DiscreteMeasure& theta, const DiscreteMeasure& mu, const TestFamily& F,
                           const Region& region_theta, const Region& region_mu, const MarginOptions& opts = {});
MarginReport affine_margin(const DiscreteMeasure& theta, const DiscreteMeasure& mu, const TestFamily& F,
                           const Region& region = {}, const MarginOptions& opts = {});
// sup over measures nu in F of int u dnu - int M dnu.
MarginReport measure_margin(const FieldFn& u, const FieldFn& M, const TestFamily& F, const MarginOptions& opts = {});

struct SweepOptions {
  std::vector<double> fractions{0.9, 0.92, 0.94, 0.96, 0.97, 0.98, 0.99};  // of dist(o, dD)
  double min_slope = 0.5;
  double ceiling = 0.0;
};

struct SweepReport {
  std::vector<double> radii;
  std::vector<double> margins;
  double slope = 0.0;  // least squares in ln(1 / (1 - R / dist(o, dD)))
  bool diverging = false;
};

// Margins of g_{B(o, R)} for growing R.
SweepReport green_sweep(const DiscreteMeasure& theta, const DiscreteMeasure& mu, const GluingConfig& cfg,
                        const Region& region, const SweepOptions& opts = {});

struct ConsistencyInput {
  FieldFn u, M;
  DiscreteMeasure riesz_u, riesz_M;
  std::optional<ScalarField> h;  // witness with u + h <= M
};

ConsistencyInput consistency_input(const ScalarField& u, const ScalarField& M, const std::optional<ScalarField>& h,
                                   const RieszOptions& riesz = {});

struct StatementResult {
  std::string id;      // s1 .. s9, h1 .. h8
  std::string form;    // witness | measure | function
  std::string family;  // class tag, with a "~" suffix for smooth families
  MarginReport margins;
  std::optional<SweepReport> sweep;
  bool implied = false;  // entailed by the witness
  std::string verdict;   // consistent | violated | witnessed | no witness
};

struct ConsistencyOptions {
  int family_size = 12;
  std::uint64_t seed = 1;
  FamilyOptions family;
  MarginOptions margin;
  SweepOptions sweep;
  bool sweep_green = true;
  double witness_tol = 1e-6;
  double harmonic_tol = 1e-3;  // total |Riesz mass| below this counts as harmonic
};

struct ConsistencyReport {
  std::string witness = "none";  // none | subharmonic | harmonic | invalid
  double witness_margin = 0.0;   // min of M - u - h over the lattice
  std::vector<StatementResult> statements;
  std::vector<std::string> findings;
  bool any_violated() const;
  const StatementResult* find(const std::string& id) const;
};

ConsistencyReport crit_consistency(const ConsistencyInput& in, const GluingConfig& cfg,
                                   const ConsistencyOptions& opts = {});
std::string consistency_csv(const ConsistencyReport& rep);

struct InclusionResult {
  TestClass from, to;
  std::size_t tested = 0;
  std::size_t failures = 0;
  std::string first_failure;
};

// Dominance and band bounds for potentials harmonic near S_o^{4r}:
// V <= g_D(., o) on D, V <= B' = sup of g_D over the band, and V >= 0 (JP1)
// or V >= B'' from the potential lower bound of the Riesz measure (ASP1).
struct DominanceResult {
  TestClass cls = TestClass::JP1;
  std::size_t tested = 0;
  double B_prime = 0.0;
  double B_second = 0.0;       // min over members of the lower bound
  double worst_excess = 0.0;   // max of V - g_D over lattice points
  double band_max = 0.0;
  double band_min = 0.0;
  std::size_t failures = 0;
  std::string first_failure;
};

struct EmbeddingReport {
  std::vector<InclusionResult> inclusions;
  std::vector<DominanceResult> dominance;
  double tol = 0.0;
  bool passed() const;
};

struct EmbeddingOptions {
  int members_per_class = 4;
  int dominance_members = 8;
  double tol = 1e-6;  // added to the grid Green tolerance for non-closed-form domains
};

EmbeddingReport embedding_check(const GluingConfig& cfg, std::uint64_t seed, const EmbeddingOptions& eo = {},
                                const FamilyOptions& opts = {});

}  // namespace potkit
