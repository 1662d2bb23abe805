#include "potkit/kernels.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "potkit/errors.hpp"

namespace potkit {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::gluing_precondition: return "gluing_precondition";
    case ErrorKind::construction: return "construction";
    case ErrorKind::solver: return "solver";
    case ErrorKind::estimator: return "estimator";
    case ErrorKind::evaluation: return "evaluation";
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::consistency: return "consistency";
    case ErrorKind::generation: return "generation";
    case ErrorKind::usage: return "usage";
  }
  return "unknown";
}

void check_dimension(int d) {
  if (d < 1 || d > 3) fail(ErrorKind::domain, "dimension must be 1, 2 or 3, got " + std::to_string(d));
}

double k_q(double q, double t) {
  if (!(t > 0.0)) fail(ErrorKind::domain, "k_q requires t > 0");
  if (q == 0.0) return std::log(t);
  return q > 0.0 ? -std::pow(t, -q) : std::pow(t, -q);
}

double kernel_radial(int d, double t) {
  if (t == 0.0) return d >= 2 ? -std::numeric_limits<double>::infinity() : 0.0;
  switch (d) {
    case 1: return t;
    case 2: return std::log(t);
    case 3: return -1.0 / t;
    default: return k_q(d - 2, t);
  }
}

double kernel_K(int d, const Point& x, const Point& y) {
  if (d < 1) fail(ErrorKind::domain, "dimension must be positive");
  return kernel_radial(d, distance(x, y));
}

double sphere_area(int p) {
  if (p < 0) fail(ErrorKind::domain, "sphere_area requires p >= 0");
  // s_0 = 2, s_1 = 2 pi, s_p = 2 pi s_{p-2} / (p - 1)
  if (p == 0) return 2.0;
  if (p == 1) return 2.0 * std::numbers::pi;
  return 2.0 * std::numbers::pi * sphere_area(p - 2) / (p - 1);
}

double ball_volume(int p) {
  if (p < 0) fail(ErrorKind::domain, "ball_volume requires p >= 0");
  if (p == 0) return 1.0;
  return sphere_area(p - 1) / p;
}

double riesz_constant(int d) {
  if (d < 1) fail(ErrorKind::domain, "dimension must be positive");
  double m = d - 2 > 1 ? d - 2 : 1;
  return 1.0 / (sphere_area(d - 1) * m);
}

}  // namespace potkit
