#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "potkit/grid.hpp"
#include "potkit/point.hpp"

namespace potkit {

using FieldFn = std::function<double(const Point&)>;

// Extended-real samples on a grid; inactive cells are ignored everywhere.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const Grid& grid, double fill = 0.0, bool active = true);

  static ScalarField sample(const Grid& grid, const FieldFn& f, const std::function<bool(const Point&)>& active = {});

  const Grid& grid() const { return grid_; }
  int dim() const { return grid_.dim; }
  std::size_t size() const { return values_.size(); }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  bool active(std::size_t i) const { return mask_[i] != 0; }
  void set_active(std::size_t i, bool on) { mask_[i] = on ? 1 : 0; }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  const Mask& mask() const { return mask_; }
  Mask& mask() { return mask_; }

  // Bilinear/trilinear interpolation; empty when a weighted corner is inactive.
  std::optional<double> interpolate(const Point& p) const;
  FieldFn as_function() const;  // interpolation, NaN where unavailable

 private:
  Grid grid_;
  std::vector<double> values_;
  Mask mask_;
};

// Standard 3/5/7-point Laplacian. Output mask marks the cells where the
// stencil was fully active and finite.
ScalarField discrete_laplacian(const ScalarField& f);

// Quadrature points on the unit sphere: equally spaced angles in d = 2,
// Gauss-Legendre latitudes times equally spaced longitudes in d = 3.
struct SphereRule {
  std::vector<Point> dirs;
  std::vector<double> weights;  // sum to 1
};
SphereRule sphere_rule(int dim, int n_points);

std::optional<double> try_spherical_mean(const ScalarField& f, const Point& x, double r, int n_points = 128);
double spherical_mean(const ScalarField& f, const Point& x, double r, int n_points = 128);
// Mean of an analytic function over the sphere.
double spherical_mean(const FieldFn& f, int dim, const Point& x, double r, int n_points = 128);

struct GlueOptions {
  double tol = 1e-9;
};

// U = max{u, u0} on the mask of u0, u elsewhere. Checks limsup u0 <= u at
// cells of u0's mask that touch the rest of u's mask.
ScalarField glue_max(const ScalarField& u, const ScalarField& u0, const GlueOptions& opts = {});

struct SubharmonicityOptions {
  double tol_factor = 10.0;  // tol = factor * h^2 * local second difference
  double abs_tol = 1e-12;
  int sphere_points = 128;
};

struct SubharmonicityReport {
  std::size_t tested = 0;
  std::size_t violations = 0;
  double worst_margin = 0.0;  // min over tested of mean - f + tol
  std::size_t worst_cell = 0;
  Point worst_point;
  double worst_radius = 0.0;
};

SubharmonicityReport subharmonicity_test(const ScalarField& f, const std::vector<double>& radii,
                                         const SubharmonicityOptions& opts = {});

struct RelaxationOptions {
  double tol = 1e-11;  // max residual of the discrete equation, relative to data scale
  std::size_t max_iter = 200000;
};

struct RelaxationInfo {
  std::size_t iterations = 0;
  double residual = 0.0;
};

// Dirichlet solve on the shell cells with boundary data taken from f at the
// neighbouring non-shell cells (red-black SOR).
ScalarField harmonic_replacement(const ScalarField& f, const Mask& shell, const RelaxationOptions& opts = {},
                                 RelaxationInfo* info = nullptr);

// Text dump: header lines then one value per active cell in row-major order;
// inactive cells are written as "x".
void write_field(std::ostream& os, const ScalarField& f);
ScalarField read_field(std::istream& is);
void save_field(const std::string& path, const ScalarField& f);
ScalarField load_field(const std::string& path);

}  // namespace potkit
