#pragma once

#include "potkit/point.hpp"

namespace potkit {

// k_q(t): ln t for q = 0, -sgn(q) t^{-q} otherwise.
double k_q(double q, double t);

// K_{d-2}(x, y) with the conventions -inf (d >= 2) and 0 (d = 1) on the diagonal.
double kernel_K(int d, const Point& x, const Point& y);

// Same kernel as a function of the distance t >= 0.
double kernel_radial(int d, double t);

double sphere_area(int p);  // s_p, area of the unit sphere in R^{p+1}; s_0 = 2
double ball_volume(int p);  // b_p, volume of the unit ball in R^p; b_0 = 1
double riesz_constant(int d);

void check_dimension(int d);

}  // namespace potkit
