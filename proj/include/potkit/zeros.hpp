#pragma once

#include <complex>
#include <limits>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "potkit/balayage.hpp"
#include "potkit/fields.hpp"
#include "potkit/measures.hpp"

namespace potkit {

using Complex = std::complex<double>;

inline Complex to_complex(const Point& p) { return {p.x, p.y}; }
inline Point to_point(Complex z) { return {z.real(), z.imag()}; }

// Indexed zero set; points are planar.
struct ZeroSet {
  std::vector<ZeroPoint> zeros;

  int total_multiplicity() const;
  DiscreteMeasure counting() const { return counting_measure(2, zeros); }
  // Sum of (1 - |z_k|) over the listed points with index >= from.
  double blaschke_sum(std::size_t from = 0) const;
  ZeroSet prefix(std::size_t K) const;

  // One "re im mult" triple per line; '#' starts a comment.
  static ZeroSet read(std::istream& in);
  static ZeroSet load(const std::string& path);
  void write(std::ostream& out) const;
};

class HoloFunction {
 public:
  enum class Kind { polynomial, blaschke, exp_of, product };

  // Coefficients c_0 + c_1 z + ...; roots are located numerically.
  static HoloFunction polynomial(std::vector<Complex> coeffs);
  static HoloFunction from_roots(const std::vector<ZeroPoint>& roots, Complex lead = 1.0);
  // Product of the first `truncation` Blaschke factors b_a(z) = (|a|/a)(a - z)/(1 - conj(a) z), b_0 = z.
  static HoloFunction blaschke(const std::vector<ZeroPoint>& zeros, std::size_t truncation);
  // exp(F) with Re F = H on the disc B(center, radius), H harmonic there. F is
  // recovered from the Fourier series of H on the circle of radius `radius`.
  static HoloFunction exp_of(const FieldFn& H, const Point& center, double radius, int modes = 128);
  static HoloFunction product(std::vector<HoloFunction> factors);

  Kind kind() const { return kind_; }
  Complex operator()(Complex z) const;
  double log_abs(const Point& p) const;  // -inf at zeros
  // Zeros with multiplicities (for exp_of: none).
  std::vector<ZeroPoint> zeros() const;
  // Exact multiplicity at z (algebraic for polynomials, listed for Blaschke products).
  int multiplicity(const Point& z) const;
  // Blaschke tail sum over zeros left out by the truncation.
  double tail() const;

 private:
  Kind kind_ = Kind::polynomial;
  std::vector<Complex> coeffs_;
  std::vector<ZeroPoint> roots_;
  std::size_t truncation_ = 0;
  double tail_ = 0.0;
  Complex lead_ = 1.0;
  bool factored_ = false;
  // exp_of
  Complex center_;
  double radius_ = 1.0;
  std::vector<Complex> series_;
  std::vector<HoloFunction> factors_;
};

// Winding number of f around the circle |w - z| = radius, rounded; a
// resolution error when the raw count is off an integer by more than 0.1.
int winding_multiplicity(const HoloFunction& f, const Point& z, double radius, int samples = 512);

struct ZeroMass {
  Point point;
  int multiplicity = 0;
  double mass = 0.0;
  double error = 0.0;  // |mass - multiplicity|
};

struct PoincareLelongReport {
  std::vector<ZeroMass> zeros;
  double max_error = 0.0;
  double max_relative_error = 0.0;
  double total_mass = 0.0;
  int total_multiplicity = 0;
  double h = 0.0;
};

// Riesz measure of ln|f| on a lattice over `box`, mass within 5h of each zero.
PoincareLelongReport poincare_lelong_check(const HoloFunction& f, const Box& box, double h,
                                           const RieszOptions& riesz = {});

enum class ZeroVariant { Z1, Z2, Z3 };
const char* to_string(ZeroVariant v);
ZeroVariant zero_variant_from_string(const std::string& s);

// Riesz data of M = M_+ - M_-.
struct GrowthData {
  DiscreteMeasure riesz_plus, riesz_minus;
  FieldFn M;  // for [z1]; empty for M = 0
  bool zero = false;
};

GrowthData growth_zero();
GrowthData growth_from_fields(const ScalarField& M_plus, const ScalarField& M_minus, const RieszOptions& riesz = {});

struct ZeroMarginOptions {
  MarginOptions margin;
  // Verdict against bound + tol when finite (the affine constant of a witness).
  double bound = std::numeric_limits<double>::quiet_NaN();
};

// Z1: sum_{D \ S_o} v(z_k) - int_{D \ S_o^{4r}} v dDelta_M - int_{band} (-v) dDelta_{M-}
// Z2, Z3: sum_{D \ S_o} v(z_k) - int_{D \ S_o} v dDelta_M
MarginReport zero_margin_check(const ZeroSet& Z, const GrowthData& M, const GluingConfig& cfg, const TestFamily& F,
                               ZeroVariant variant, const ZeroMarginOptions& opts = {});

// For M = 0 and any test function with ceiling b+ vanishing on dD:
// v <= (b+ / min_{dS_o} g_D(., o)) g_D(., o) on D \ S_o, so the margin is at
// most that multiple of sum_{D \ S_o} g_D(z_k, o). Needs a closed-form D.
double zero_margin_bound(const ZeroSet& Z, const GluingConfig& cfg);

struct Crit3Options {
  std::size_t truncation = 0;  // 0 keeps every listed zero
  int family_size = 8;
  std::uint64_t seed = 1;
  FamilyOptions family;  // family.threads also sizes the margin pool
  double grid_h = 1.0 / 64;    // sample lattice for |f| <= exp M
  double tol = 1e-6;
  int modes = 128;
};

struct Crit3Report {
  bool z1_feasible = false;
  double z1_excess = 0.0;  // max of ln|f| - M over the sample lattice
  double shift = 0.0;      // constant removed from the harmonic factor
  double tail = 0.0;       // sum_{k > K} (1 - |z_k|)
  double local_sup = 0.0;  // max |f| on |z| <= 1/2
  MarginReport z2, z3, z4;
  double bound = 0.0;      // witness bound used for M = 0
  bool consistent() const;
  std::vector<std::string> findings;
};

Crit3Report crit3_roundtrip(const ZeroSet& Z, const GrowthData& M, const GluingConfig& cfg,
                            const Crit3Options& opts = {});

struct ZeroSweep {
  std::vector<std::size_t> K;
  std::vector<double> margins;     // max Z3 margin per prefix
  std::vector<double> local_sup;   // truncated-product sup on |z| <= 1/2
  double slope = 0.0;              // least squares against ln K
  bool diverging = false;
};

// Z3 margins along prefixes Z_K with M = 0.
ZeroSweep zero_sweep(const ZeroSet& Z, const std::vector<std::size_t>& Ks, const GluingConfig& cfg,
                     const TestFamily& F, double min_slope = 0.5, int threads = 0);

}  // namespace potkit
