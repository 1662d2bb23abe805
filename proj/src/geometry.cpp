#include "potkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

#include "potkit/errors.hpp"
#include "potkit/kernels.hpp"

namespace potkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<Point> sphere_points(int dim, const Point& c, double r, double density) {
  std::vector<Point> out;
  if (dim == 1) {
    out.push_back(c - Point(r));
    out.push_back(c + Point(r));
    return out;
  }
  if (dim == 2) {
    int n = std::max(8, static_cast<int>(std::ceil(2.0 * std::numbers::pi * r * density)));
    for (int j = 0; j < n; ++j) {
      double t = 2.0 * std::numbers::pi * j / n;
      out.push_back(c + Point(r * std::cos(t), r * std::sin(t)));
    }
    return out;
  }
  double lin = density / 8.0;
  int n = std::max(32, static_cast<int>(std::ceil(4.0 * std::numbers::pi * r * r * lin * lin)));
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int j = 0; j < n; ++j) {
    double z = 1.0 - 2.0 * (j + 0.5) / n;
    double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    double t = golden * j;
    out.push_back(c + Point(r * s * std::cos(t), r * s * std::sin(t), r * z));
  }
  return out;
}

Point radial_projection(const Point& p, const Point& c, double r, int dim) {
  Point v = p - c;
  double n = norm(v);
  if (n == 0.0) {
    Point e;
    e[0] = 1.0;
    (void)dim;
    return c + e * r;
  }
  return c + v * (r / n);
}

}  // namespace

// ---------------------------------------------------------------- CompactSet

CompactSet::CompactSet(int dim, std::vector<Ball> balls) : dim_(dim), balls_(std::move(balls)) {
  check_dimension(dim);
  for (const auto& b : balls_)
    if (!(b.radius >= 0.0)) fail(ErrorKind::domain, "compact set ball radius must be nonnegative");
}

CompactSet CompactSet::point(int dim, const Point& p) { return CompactSet(dim, {{p, 0.0}}); }

CompactSet CompactSet::ball(int dim, const Point& c, double r) { return CompactSet(dim, {{c, r}}); }

CompactSet CompactSet::segment(int dim, const Point& a, const Point& b, int samples) {
  if (samples < 2) fail(ErrorKind::domain, "segment needs at least two samples");
  std::vector<Ball> balls;
  for (int j = 0; j < samples; ++j) {
    double t = static_cast<double>(j) / (samples - 1);
    balls.push_back({a + (b - a) * t, 0.0});
  }
  return CompactSet(dim, std::move(balls));
}

CompactSet CompactSet::from_mask(const Grid& grid, const Mask& mask) {
  std::vector<Ball> balls;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (mask[i]) balls.push_back({grid.point(i), 0.0});
  return CompactSet(grid.dim, std::move(balls));
}

double CompactSet::distance(const Point& p) const {
  double best = kInf;
  for (const auto& b : balls_) best = std::min(best, std::max(0.0, potkit::distance(p, b.center) - b.radius));
  return best;
}

bool CompactSet::interior_contains(const Point& p) const {
  for (const auto& b : balls_)
    if (potkit::distance(p, b.center) < b.radius) return true;
  return false;
}

Box CompactSet::bounding_box() const {
  if (balls_.empty()) fail(ErrorKind::domain, "empty compact set");
  Box box{{kInf, kInf, kInf}, {-kInf, -kInf, -kInf}};
  for (const auto& b : balls_)
    for (int a = 0; a < 3; ++a) {
      double r = a < dim_ ? b.radius : 0.0;
      box.lo[a] = std::min(box.lo[a], b.center[a] - r);
      box.hi[a] = std::max(box.hi[a], b.center[a] + r);
    }
  return box;
}

double CompactSet::sup_norm() const {
  double s = 0.0;
  for (const auto& b : balls_) s = std::max(s, norm(b.center) + b.radius);
  return s;
}

CompactSet CompactSet::inflated(double r) const {
  std::vector<Ball> balls = balls_;
  for (auto& b : balls) b.radius += r;
  return CompactSet(dim_, std::move(balls));
}

std::vector<Point> CompactSet::boundary_sample(double density) const {
  std::vector<Point> out;
  for (std::size_t i = 0; i < balls_.size(); ++i) {
    const auto& b = balls_[i];
    std::vector<Point> pts;
    if (b.radius == 0.0)
      pts.push_back(b.center);
    else
      pts = sphere_points(dim_, b.center, b.radius, density);
    for (const auto& p : pts) {
      bool covered = false;
      for (std::size_t j = 0; j < balls_.size() && !covered; ++j)
        if (j != i && potkit::distance(p, balls_[j].center) < balls_[j].radius * (1.0 - 1e-12)) covered = true;
      if (!covered) out.push_back(p);
    }
  }
  return out;
}

bool CompactSet::parallel_set_connected(double r) const {
  const std::size_t n = balls_.size();
  if (n == 0) return false;
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    std::size_t i = stack.back();
    stack.pop_back();
    for (std::size_t j = 0; j < n; ++j) {
      if (seen[j]) continue;
      double gap = potkit::distance(balls_[i].center, balls_[j].center) - balls_[i].radius - balls_[j].radius;
      bool touching = r > 0.0 ? gap < 2.0 * r : gap <= 0.0;
      if (touching) {
        seen[j] = 1;
        ++reached;
        stack.push_back(j);
      }
    }
  }
  return reached == n;
}

// -------------------------------------------------------------------- Domain

struct Domain::Impl {
  int dim = 2;
  Kind kind = Kind::ball;
  bool regular = true;
  Point center;
  double radius = 1.0;
  double inner = 0.0;
  Point normal;
  double offset = 0.0;
  std::vector<Ball> balls;
  std::function<double(const Point&)> sdf;
  Box box;
};

namespace {

Box ball_box(int dim, const Point& c, double r) {
  Box b{c, c};
  for (int a = 0; a < dim; ++a) {
    b.lo[a] -= r;
    b.hi[a] += r;
  }
  return b;
}

double union_sd(const std::vector<Ball>& balls, const Point& p) {
  double best = kInf;
  for (const auto& b : balls) best = std::min(best, distance(p, b.center) - b.radius);
  return best;
}

Point numeric_gradient(const std::function<double(const Point&)>& f, const Point& p, int dim, double eps) {
  Point g;
  for (int a = 0; a < dim; ++a) {
    Point e;
    e[a] = eps;
    g[a] = (f(p + e) - f(p - e)) / (2.0 * eps);
  }
  return g;
}

}  // namespace

Domain Domain::ball(int dim, const Point& center, double radius) {
  check_dimension(dim);
  if (!(radius > 0.0)) fail(ErrorKind::domain, "ball radius must be positive");
  auto impl = std::make_shared<Impl>();
  impl->dim = dim;
  impl->kind = Kind::ball;
  impl->center = center;
  impl->radius = radius;
  impl->box = ball_box(dim, center, radius);
  Domain d;
  d.impl_ = impl;
  return d;
}

Domain Domain::annulus(int dim, const Point& center, double r_in, double r_out) {
  check_dimension(dim);
  if (!(r_in > 0.0) || !(r_in < r_out)) fail(ErrorKind::domain, "annulus requires 0 < r_in < r_out");
  auto impl = std::make_shared<Impl>();
  impl->dim = dim;
  impl->kind = Kind::annulus;
  impl->center = center;
  impl->radius = r_out;
  impl->inner = r_in;
  impl->box = ball_box(dim, center, r_out);
  Domain d;
  d.impl_ = impl;
  return d;
}

Domain Domain::half_space(int dim, const Point& normal, double offset) {
  check_dimension(dim);
  double n = norm(normal);
  if (!(n > 0.0)) fail(ErrorKind::domain, "half-space normal must be nonzero");
  auto impl = std::make_shared<Impl>();
  impl->dim = dim;
  impl->kind = Kind::half_space;
  impl->normal = normal / n;
  impl->offset = offset / n;
  const double big = 1e3;
  impl->box = ball_box(dim, Point(), big);
  Domain d;
  d.impl_ = impl;
  return d;
}

Domain Domain::ball_union(int dim, std::vector<Ball> balls) {
  check_dimension(dim);
  if (balls.empty()) fail(ErrorKind::domain, "ball union needs at least one ball");
  for (const auto& b : balls)
    if (!(b.radius > 0.0)) fail(ErrorKind::domain, "ball union radii must be positive");
  if (balls.size() == 1) return ball(dim, balls[0].center, balls[0].radius);
  auto impl = std::make_shared<Impl>();
  impl->dim = dim;
  impl->kind = Kind::ball_union;
  impl->box = CompactSet(dim, balls).bounding_box();
  impl->balls = std::move(balls);
  Domain d;
  d.impl_ = impl;
  return d;
}

Domain Domain::implicit(int dim, std::function<double(const Point&)> sdf, const Box& box, bool regular) {
  check_dimension(dim);
  if (!sdf) fail(ErrorKind::domain, "implicit domain needs a signed distance oracle");
  auto impl = std::make_shared<Impl>();
  impl->dim = dim;
  impl->kind = Kind::implicit;
  impl->regular = regular;
  impl->sdf = std::move(sdf);
  impl->box = box;
  Domain d;
  d.impl_ = impl;
  return d;
}

int Domain::dim() const { return impl_->dim; }
Domain::Kind Domain::kind() const { return impl_->kind; }
bool Domain::regular() const { return impl_->regular; }
Point Domain::center() const { return impl_->center; }
double Domain::radius() const { return impl_->radius; }
double Domain::inner_radius() const { return impl_->inner; }
Point Domain::normal() const { return impl_->normal; }
double Domain::offset() const { return impl_->offset; }
const std::vector<Ball>& Domain::balls() const { return impl_->balls; }
Box Domain::bounding_box() const { return impl_->box; }

std::string Domain::kind_name() const {
  switch (impl_->kind) {
    case Kind::ball: return "ball";
    case Kind::annulus: return "annulus";
    case Kind::half_space: return "half_space";
    case Kind::ball_union: return "ball_union";
    case Kind::implicit: return "implicit";
  }
  return "unknown";
}

double Domain::signed_distance(const Point& p) const {
  const Impl& m = *impl_;
  switch (m.kind) {
    case Kind::ball: return distance(p, m.center) - m.radius;
    case Kind::annulus: {
      double t = distance(p, m.center);
      return std::max(t - m.radius, m.inner - t);
    }
    case Kind::half_space: return dot(m.normal, p) - m.offset;
    case Kind::ball_union: return union_sd(m.balls, p);
    case Kind::implicit: {
      if (!m.box.contains(p, m.dim)) return std::max(m.sdf(p), 0.0) + 1e-300;
      return m.sdf(p);
    }
  }
  return kInf;
}

double Domain::boundary_distance(const Point& p) const { return std::abs(signed_distance(p)); }

Point Domain::project_to_boundary(const Point& p) const {
  const Impl& m = *impl_;
  switch (m.kind) {
    case Kind::ball: return radial_projection(p, m.center, m.radius, m.dim);
    case Kind::annulus: {
      double t = distance(p, m.center);
      double r = (t - m.inner < m.radius - t) ? m.inner : m.radius;
      return radial_projection(p, m.center, r, m.dim);
    }
    case Kind::half_space: return p - m.normal * (dot(m.normal, p) - m.offset);
    case Kind::ball_union: {
      Point best = p;
      double best_d = kInf;
      Point fallback = p;
      double fallback_d = kInf;
      for (std::size_t i = 0; i < m.balls.size(); ++i) {
        Point q = radial_projection(p, m.balls[i].center, m.balls[i].radius, m.dim);
        double dq = distance(p, q);
        if (dq < fallback_d) {
          fallback_d = dq;
          fallback = q;
        }
        bool covered = false;
        for (std::size_t j = 0; j < m.balls.size() && !covered; ++j)
          if (j != i && distance(q, m.balls[j].center) < m.balls[j].radius * (1.0 - 1e-12)) covered = true;
        if (!covered && dq < best_d) {
          best_d = dq;
          best = q;
        }
      }
      return best_d < kInf ? best : fallback;
    }
    case Kind::implicit: {
      Point q = p;
      double eps = 1e-7 * std::max(1.0, m.box.diameter());
      for (int it = 0; it < 8; ++it) {
        double s = m.sdf(q);
        Point g = numeric_gradient(m.sdf, q, m.dim, eps);
        double gn = dot(g, g);
        if (gn == 0.0) break;
        q = q - g * (s / gn);
        if (std::abs(s) < 1e-14) break;
      }
      return q;
    }
  }
  return p;
}

std::vector<Point> Domain::boundary_sample(double density) const {
  const Impl& m = *impl_;
  switch (m.kind) {
    case Kind::ball: return sphere_points(m.dim, m.center, m.radius, density);
    case Kind::annulus: {
      auto a = sphere_points(m.dim, m.center, m.inner, density);
      auto b = sphere_points(m.dim, m.center, m.radius, density);
      a.insert(a.end(), b.begin(), b.end());
      return a;
    }
    case Kind::ball_union: {
      std::vector<Point> out;
      for (const auto& p : CompactSet(m.dim, m.balls).boundary_sample(density)) out.push_back(p);
      return out;
    }
    case Kind::half_space:
    case Kind::implicit: {
      // Sign changes of the signed distance on a lattice over the box,
      // projected onto the zero level set.
      double step = m.dim == 3 ? 8.0 / density : 1.0 / density;
      Box box = m.kind == Kind::half_space ? ball_box(m.dim, m.normal * m.offset, 4.0) : m.box;
      Grid g = Grid::covering(box, step, m.dim);
      std::vector<Point> out;
      auto offs = g.axis_offsets();
      for (std::size_t i = 0; i < g.size(); ++i) {
        auto c = g.coords(i);
        Point p = g.point(i);
        double sp = signed_distance(p);
        if (!(sp < 0.0)) continue;
        for (const auto& o : offs) {
          if (o[0] + o[1] + o[2] < 0) continue;
          if (!g.in_range(c[0] + o[0], c[1] + o[1], c[2] + o[2])) continue;
          Point q = g.point(g.index(c[0] + o[0], c[1] + o[1], c[2] + o[2]));
          if (signed_distance(q) >= 0.0) out.push_back(project_to_boundary((p + q) * 0.5));
        }
      }
      return out;
    }
  }
  return {};
}

// ---------------------------------------------------------------- operations

Domain parallel_set(const CompactSet& S, double r) {
  if (!(r > 0.0)) fail(ErrorKind::domain, "parallel set radius must be positive");
  if (S.empty()) fail(ErrorKind::domain, "parallel set of an empty set");
  std::vector<Ball> balls = S.balls();
  for (auto& b : balls) b.radius += r;
  return Domain::ball_union(S.dim(), std::move(balls));
}

double separation(const CompactSet& S, const Domain& D, double density) {
  if (S.empty()) fail(ErrorKind::precondition, "separation of an empty set");
  for (const auto& b : S.balls())
    if (!D.contains(b.center))
      fail(ErrorKind::precondition, "compact set is not contained in the domain");
  double best = kInf;
  for (const auto& q : D.boundary_sample(density)) best = std::min(best, S.distance(q));
  if (!(best > 0.0)) fail(ErrorKind::precondition, "compact set meets the domain boundary");
  return best;
}

Domain regular_enclosing_domain(const CompactSet& S, double r, double r_prime) {
  if (!(r > 0.0) || !(r < r_prime)) fail(ErrorKind::precondition, "regular enclosing domain requires 0 < r < r'");
  if (S.empty()) fail(ErrorKind::precondition, "regular enclosing domain of an empty set");
  if (!S.parallel_set_connected(r)) fail(ErrorKind::precondition, "set is not connected at the requested scale");
  return parallel_set(S, 0.5 * (r + r_prime));
}

ComponentLabels label_components(const Grid& grid, const Mask& mask) {
  ComponentLabels out;
  out.label.assign(grid.size(), -1);
  auto offs = grid.axis_offsets();
  std::vector<std::size_t> queue;
  for (std::size_t s = 0; s < grid.size(); ++s) {
    if (!mask[s] || out.label[s] >= 0) continue;
    int id = out.count++;
    out.label[s] = id;
    queue.clear();
    queue.push_back(s);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      auto c = grid.coords(queue[head]);
      for (const auto& o : offs) {
        int i = c[0] + o[0], j = c[1] + o[1], k = c[2] + o[2];
        if (!grid.in_range(i, j, k)) continue;
        std::size_t q = grid.index(i, j, k);
        if (mask[q] && out.label[q] < 0) {
          out.label[q] = id;
          queue.push_back(q);
        }
      }
    }
  }
  return out;
}

std::vector<Mask> connected_components(const Grid& grid, const Mask& mask) {
  auto labels = label_components(grid, mask);
  std::vector<Mask> out(labels.count, Mask(grid.size(), 0));
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (labels.label[i] >= 0) out[labels.label[i]][i] = 1;
  return out;
}

}  // namespace potkit
