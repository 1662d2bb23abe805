#pragma once

#include <array>
#include <cmath>

namespace potkit {

// Points live in R^3; lower dimensions leave the trailing coordinates at zero.
struct Point {
  double x = 0.0, y = 0.0, z = 0.0;

  constexpr Point() = default;
  constexpr Point(double a, double b = 0.0, double c = 0.0) : x(a), y(b), z(c) {}

  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  Point& operator+=(const Point& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Point& operator-=(const Point& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Point& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
};

inline Point operator+(Point a, const Point& b) { return a += b; }
inline Point operator-(Point a, const Point& b) { return a -= b; }
inline Point operator*(Point a, double s) { return a *= s; }
inline Point operator*(double s, Point a) { return a *= s; }
inline Point operator/(Point a, double s) { return a *= 1.0 / s; }
inline bool operator==(const Point& a, const Point& b) { return a.x == b.x && a.y == b.y && a.z == b.z; }
inline bool operator!=(const Point& a, const Point& b) { return !(a == b); }

inline double dot(const Point& a, const Point& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Point& a) { return std::sqrt(dot(a, a)); }
inline double distance(const Point& a, const Point& b) { return norm(a - b); }

struct Box {
  Point lo, hi;

  bool contains(const Point& p, int d) const {
    for (int i = 0; i < d; ++i)
      if (p[i] < lo[i] || p[i] > hi[i]) return false;
    return true;
  }
  Box inflated(double r, int d) const {
    Box b = *this;
    for (int i = 0; i < d; ++i) { b.lo[i] -= r; b.hi[i] += r; }
    return b;
  }
  double diameter() const { return distance(lo, hi); }
};

}  // namespace potkit
