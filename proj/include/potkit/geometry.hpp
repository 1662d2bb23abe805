#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "potkit/grid.hpp"
#include "potkit/point.hpp"

namespace potkit {

struct Ball {
  Point center;
  double radius = 0.0;  // 0 for a single point
};

// Compact set stored as a finite union of closed balls.
class CompactSet {
 public:
  CompactSet() = default;
  CompactSet(int dim, std::vector<Ball> balls);

  static CompactSet point(int dim, const Point& p);
  static CompactSet ball(int dim, const Point& c, double r);
  // Dense sample of the segment [a, b] with the given number of points.
  static CompactSet segment(int dim, const Point& a, const Point& b, int samples);
  // Active cells of a grid mask, each taken as a point.
  static CompactSet from_mask(const Grid& grid, const Mask& mask);

  int dim() const { return dim_; }
  const std::vector<Ball>& balls() const { return balls_; }
  bool empty() const { return balls_.empty(); }

  double distance(const Point& p) const;  // dist(p, S)
  bool contains(const Point& p) const { return distance(p) == 0.0; }
  bool interior_contains(const Point& p) const;
  Box bounding_box() const;
  double sup_norm() const;  // sup over S of |x|
  // The closed r-neighbourhood {dist(., S) <= r}, again a union of balls.
  CompactSet inflated(double r) const;
  std::vector<Point> boundary_sample(double density) const;
  // Connectivity of the open r-parallel set (r = 0 checks the balls themselves).
  bool parallel_set_connected(double r) const;

 private:
  int dim_ = 2;
  std::vector<Ball> balls_;
};

class Domain {
 public:
  enum class Kind { ball, annulus, half_space, ball_union, implicit };

  static Domain ball(int dim, const Point& center, double radius);
  static Domain annulus(int dim, const Point& center, double r_in, double r_out);
  // {x : <normal, x> < offset}; the normal is normalised on construction.
  static Domain half_space(int dim, const Point& normal, double offset);
  static Domain ball_union(int dim, std::vector<Ball> balls);
  // Signed distance oracle (negative inside) plus a bounding box; points
  // outside the box are outside.
  static Domain implicit(int dim, std::function<double(const Point&)> sdf, const Box& box, bool regular);

  int dim() const;
  Kind kind() const;
  std::string kind_name() const;
  bool regular() const;

  bool contains(const Point& p) const { return signed_distance(p) < 0.0; }
  // Exact for ball, annulus and half-space; elsewhere exact outside and a
  // lower bound on depth inside (safe for walk-on-spheres steps).
  double signed_distance(const Point& p) const;
  double boundary_distance(const Point& p) const;
  Point project_to_boundary(const Point& p) const;
  std::vector<Point> boundary_sample(double density) const;
  Box bounding_box() const;
  double diameter() const { return bounding_box().diameter(); }

  // Defining parameters, used for serialization and closed forms.
  Point center() const;
  double radius() const;
  double inner_radius() const;
  Point normal() const;
  double offset() const;
  const std::vector<Ball>& balls() const;

  struct Impl;

 private:
  std::shared_ptr<const Impl> impl_;
};

// S^{cup r} = {dist(., S) < r}.
Domain parallel_set(const CompactSet& S, double r);

// dist(S, dD) by minimising over a boundary sample of D.
double separation(const CompactSet& S, const Domain& D, double density = 256.0);

// Regular domain D' with S^{cup r} c D' c S^{cup r'}: {dist(., S) < (r + r')/2}.
Domain regular_enclosing_domain(const CompactSet& S, double r, double r_prime);

struct ComponentLabels {
  std::vector<int> label;  // -1 outside the mask
  int count = 0;
};

// 4-connectivity (d = 2) or 6-connectivity (d = 3); components numbered by
// their smallest cell index.
ComponentLabels label_components(const Grid& grid, const Mask& mask);
std::vector<Mask> connected_components(const Grid& grid, const Mask& mask);

}  // namespace potkit
