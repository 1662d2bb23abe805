#pragma once

#include <optional>
#include <string>
#include <vector>

#include "potkit/fields.hpp"
#include "potkit/geometry.hpp"
#include "potkit/measures.hpp"

namespace potkit {

// o in Int S_o, S_o compactly inside D, 0 < 4r < dist(S_o, dD), b_- < 0 < b_+.
struct GluingConfig {
  CompactSet S_o;
  Point o;
  double r = 0.0;
  double b_minus = -1.0;
  double b_plus = 1.0;
  Domain domain;

  int dim() const { return domain.dim(); }
  void validate() const;
  // The parallel sets S_o^{cup kr} are {shell_distance < k r}.
  double shell_distance(const Point& x) const { return S_o.distance(x); }
};

// Lattice covering clos D with a margin of four cells.
Grid gluing_grid(const GluingConfig& cfg, double h);

enum class TestClass {
  sbh0,             // sbh_0(D \ S_o; <= b+)
  sbh0_plus,        // positive part of the above
  sbh00_plus,       // positive, vanishing near dD
  sbh00_r,          // sbh_00(D \ S_o; r, b- < b+)
  sbh_plus0_r,      // sbh_+0(D \ S_o; r, b- < b+)
  sbh_plus0_circ_r, // sbh_+0(D \ S_o; o r, b- < b+)
  JP,
  JP1,
  ASP,
  ASP1,
  Omega,  // harmonic measures of subdomains
  G,      // extended Green's functions of subdomains
  J,      // Jensen measures for o
  AS,     // Arens-Singer measures for o
};

const char* to_string(TestClass c);
TestClass test_class_from_string(const std::string& s);
std::vector<TestClass> all_test_classes();
// Potential classes live on D \ o; the rest on D \ S_o.
bool is_potential_class(TestClass c);
// Omega, J and AS members are measures.
bool is_measure_class(TestClass c);

struct TestFunction {
  std::string id;
  std::string kind;
  std::vector<double> params;
  FieldFn eval;  // extended by 0 outside D
  bool smooth = false;
  // Pole constant: eval ~ -pole_coefficient K(., o) near o (potential classes).
  double pole_coefficient = 0.0;
  // Measure-class members; for potentials, the Riesz measure when known.
  std::optional<DiscreteMeasure> measure;
};

struct MembershipOptions {
  double bound_tol = 1e-9;   // relative to max(1, b+)
  double mean_tol = 1e-6;
  std::vector<double> radii;  // subharmonicity radii; empty selects {2h, 4h}
  int sphere_points = 128;
};

struct MembershipReport {
  bool passed = false;
  std::string reason;
  double sup = 0.0;
  double band_min = 0.0;
  double circ_min = 0.0;
  std::size_t subharmonic_violations = 0;
};

MembershipReport verify_membership(const TestFunction& v, TestClass cls, const GluingConfig& cfg, const Grid& grid,
                                   const MembershipOptions& opts = {});

// Samples v outside S_o (or, for potentials, everywhere off o); 0 outside D.
ScalarField sample_test_function(const TestFunction& v, const GluingConfig& cfg, const Grid& grid,
                                 bool punctured = false);

}  // namespace potkit
