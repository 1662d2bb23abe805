#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "potkit/fields.hpp"
#include "potkit/geometry.hpp"
#include "potkit/rng.hpp"

namespace potkit {

enum class GreenMethod { closed_form, walk_on_spheres, grid_dirichlet };

const char* to_string(GreenMethod m);
GreenMethod green_method_from_string(const std::string& s);

struct WosOptions {
  std::size_t samples = 100000;
  double eps_shell = 0.0;  // 0 selects 1e-4 * diam(D)
  std::uint64_t seed = 1;
  std::size_t max_steps = 1000000;
  int threads = 0;  // 0 selects default_thread_count()
};

struct GridDirichletOptions {
  double h = 1.0 / 64;
  double tol = 1e-10;
};

struct GreenSpec {
  Domain domain;
  Point pole;
  GreenMethod method = GreenMethod::closed_form;
  WosOptions wos;
  GridDirichletOptions grid;
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::string method;
  bool resolved = true;  // false on the boundary of a domain without a closed form
};

// True when the domain kind has an exact Green's function here.
bool has_closed_form(const Domain& d);

// g_D(., o) extended by 0 outside clos D and +inf at the pole.
class GreenFunction {
 public:
  explicit GreenFunction(GreenSpec spec);

  const GreenSpec& spec() const { return spec_; }
  Estimate estimate(const Point& x) const;
  double operator()(const Point& x) const { return estimate(x).value; }
  FieldFn as_function() const;
  // Values on every node (all active); the pole node holds +inf.
  ScalarField sample(const Grid& grid) const;

 private:
  GreenSpec spec_;
  std::shared_ptr<const ScalarField> harmonic_part_;  // grid_dirichlet only
};

double green(const GreenSpec& spec, const Point& x);
Estimate green_estimate(const GreenSpec& spec, const Point& x);

// Closed-form Green's function; the domain must satisfy has_closed_form.
double green_closed_form(const Domain& d, const Point& o, const Point& x);

// Walk-on-spheres estimate of the integral of f against harmonic measure of D at o.
Estimate harmonic_measure_integral(const Domain& d, const Point& o, const FieldFn& f, const WosOptions& opts = {});

// Exit point of one walk started at x; used by tests and estimators.
Point wos_exit_point(const Domain& d, const Point& x, double eps_shell, std::size_t max_steps, Rng& rng);

// Minimum of g_D(., o) over a boundary sample of S. Requires o in Int S and S inside D.
double green_floor(const GreenSpec& spec, const CompactSet& S, double density = 256.0);

}  // namespace potkit
