#pragma once

#include <string>
#include <vector>

#include "potkit/fields.hpp"
#include "potkit/green.hpp"
#include "potkit/testfn.hpp"

namespace potkit {

struct GluingOptions {
  double h = 1.0 / 128;  // lattice spacing when sampling test functions
  double tol = 0.0;      // certificate tolerance; 0 selects 5 h (scaled by the data)
  RelaxationOptions relax;
  GridDirichletOptions green_grid;  // for domains without a closed form
  std::vector<double> radii;        // subharmonicity radii; empty selects {2h, 4h}
};

struct QuantitativeBounds {
  double m_v = 0.0;
  double M_v = 0.0;
  double m_g = 0.0;
  double M_g = 1.0;
};

struct QuantitativeGlue {
  ScalarField V;
  ScalarField v0;
  double coefficient = 0.0;  // (M_v^+ + m_v^-) / (M_g - m_g)
  SubharmonicityReport subharmonicity;
};

// v lives on O (its mask), g on O_0 (its mask), both on one grid.
// v_0 = c (2 g - M_g - m_g); V = v_0 on O_0 \ O, max on the overlap, v on O \ O_0.
QuantitativeGlue glue_quantitative(const ScalarField& v, const ScalarField& g, const QuantitativeBounds& b,
                                   const GluingOptions& opts = {});

struct ShellConstants {
  double M_v = 0.0;  // sup of v over S_o^{cup 4r} \ S_o
  double m_v = 0.0;  // inf of the r-spherical mean over S_o^{cup 3r} \ S_o^{cup 2r}
  double M_g = 0.0;  // inf of g_{D_r}(., o) over dS_o^{cup 2r}
  Domain D_r;
};

ShellConstants shell_constants(const ScalarField& v, const GluingConfig& cfg, const GluingOptions& opts = {});

// Green's function of the regular domain between S_o^{cup 2r} and S_o^{cup 3r}.
Domain shell_domain(const GluingConfig& cfg);
GreenFunction make_green(const Domain& D, const Point& o, const GluingOptions& opts = {});
// M_g; depends on (o, S_o, r) only.
double shell_green_floor(const GluingConfig& cfg, const GluingOptions& opts = {});

struct ClauseResult {
  std::string id;
  bool passed = false;
  double worst_margin = 0.0;  // slack of the clause; negative beyond tolerance means failure
  Point location;
  std::string note;
};

struct Certificate {
  std::vector<ClauseResult> clauses;
  SubharmonicityReport subharmonicity;
  double tol = 0.0;
  bool passed() const;
  const ClauseResult* find(const std::string& id) const;
};

struct GreenGlue {
  ScalarField V;        // defined on the mask of v plus S_o, minus the pole
  ScalarField v_check;  // harmonic replacement on S_o^{cup 4r} \ clos S_o^{cup r}
  ShellConstants constants;
  double coefficient = 0.0;  // (M_v^+ + m_v^-) / M_g; V ~ -2 coefficient K near o
  FieldFn near_pole;         // analytic V near o
  Certificate certificate;
};

// Shell construction. The constants come from shell_constants unless given.
GreenGlue glue_with_green(const ScalarField& v, const GluingConfig& cfg, const GluingOptions& opts = {});
GreenGlue glue_with_green(const ScalarField& v, const GluingConfig& cfg, const ShellConstants& constants,
                          const GluingOptions& opts = {});

struct TestGlue {
  GreenGlue glue;
  double B = 0.0;  // 2 (b+ - b-) / M_g
  TestClass cls = TestClass::sbh_plus0_circ_r;
};

// v must belong to sbh_+0(D \ S_o; o r, b- < b+) or, when positive, to sbh_0^+(D \ S_o; <= b+).
TestGlue glue_test_function(const TestFunction& v, const GluingConfig& cfg, const GluingOptions& opts = {});

struct ApproxSequence {
  std::vector<ScalarField> V;  // V_1 .. V_n
  double B = 0.0;
  TestGlue glue;
  std::vector<std::size_t> monotonicity_violations;  // per k = 1 .. n-1
  double bound_margin = 0.0;  // min over band cells of b+ + B g_D - B V_k
  std::vector<std::string> classes;
};

ApproxSequence potential_approx_sequence(const TestFunction& v, const GluingConfig& cfg, int n,
                                         const GluingOptions& opts = {});

// V_k near the pole, for classification.
FieldFn approx_near_pole(const ApproxSequence& seq, int k);

}  // namespace potkit
