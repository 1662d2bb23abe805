#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "potkit/fields.hpp"
#include "potkit/point.hpp"

namespace potkit {

struct Atom {
  Point point;
  double mass = 0.0;
};

// One side of a Jordan pair: atoms plus an optional per-cell density whose
// cell masses are density * h^d.
struct MeasurePart {
  std::vector<Atom> atoms;
  std::optional<ScalarField> density;

  double mass() const;
  bool empty() const;
};

// Charge mu = positive - negative; positive measures have an empty negative part.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  explicit DiscreteMeasure(int dim) : dim_(dim) {}

  static DiscreteMeasure dirac(int dim, const Point& p, double mass = 1.0);
  // Atoms of either sign; negative masses go to the negative part.
  static DiscreteMeasure from_atoms(int dim, const std::vector<Atom>& atoms);

  int dim() const { return dim_; }
  const MeasurePart& positive() const { return pos_; }
  const MeasurePart& negative() const { return neg_; }
  MeasurePart& positive() { return pos_; }
  MeasurePart& negative() { return neg_; }

  void add_atom(const Point& p, double mass);
  double total_mass() const { return pos_.mass() - neg_.mass(); }
  double positive_mass() const { return pos_.mass(); }
  double negative_mass() const { return neg_.mass(); }
  bool is_positive() const { return neg_.empty(); }

  // Set by riesz_measure when the Laplacian had negative cells beyond tolerance.
  bool non_subharmonic = false;

  DiscreteMeasure scaled(double a) const;
  DiscreteMeasure operator+(const DiscreteMeasure& o) const;
  DiscreteMeasure operator-(const DiscreteMeasure& o) const { return *this + o.scaled(-1.0); }

  // Support points: atoms and density cells carrying mass.
  std::vector<Point> support_points() const;
  // Combine atoms of the positive part that lie within `radius` of each other.
  void merge_atoms(double radius);

 private:
  int dim_ = 2;
  MeasurePart pos_, neg_;
};

struct IntegrateOptions {
  double negligible_mass = 1e-12;
};

// Upper-integral convention: the positive part is summed first and +inf
// short-circuits; inf - inf and NaN raise evaluation errors.
double integrate(const FieldFn& v, const DiscreteMeasure& mu, const IntegrateOptions& opts = {});
double integrate(const ScalarField& v, const DiscreteMeasure& mu, const IntegrateOptions& opts = {});

struct RieszOptions {
  double tol_factor = 10.0;  // negative cells within factor * (stencil error) are clamped
  double abs_tol = 1e-9;
  // Small enclosed holes (poles, masked or -inf) get an atom carrying the
  // discrete flux through a box `pole_margin` cells around them.
  bool pole_atoms = true;
  int pole_margin = 3;
  int max_hole_extent = 3;
};

// c_d times the discrete Laplacian, as a density on the valid cells.
DiscreteMeasure riesz_measure(const ScalarField& u, const RieszOptions& opts = {});

struct ZeroPoint {
  Point point;
  int multiplicity = 1;
};

DiscreteMeasure counting_measure(int dim, const std::vector<ZeroPoint>& zeros);

DiscreteMeasure restrict_measure(const DiscreteMeasure& mu, const std::function<bool(const Point&)>& region);

// Quadrature measures used as Jensen / Arens-Singer examples.
DiscreteMeasure sphere_measure(int dim, const Point& c, double r, int n_points);
DiscreteMeasure ball_measure(int dim, const Point& c, double r, int n_radial, int n_angular);
// Harmonic measure of the ball B(c, R) for the point o (Poisson kernel weights).
DiscreteMeasure ball_harmonic_measure(int dim, const Point& c, double R, const Point& o, int n_points);

}  // namespace potkit
