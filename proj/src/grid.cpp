#include "potkit/grid.hpp"

#include <cmath>

namespace potkit {

Grid Grid::covering(const Box& box, double h, int dim) {
  Grid g;
  g.dim = dim;
  g.h = h;
  for (int a = 0; a < 3; ++a) {
    if (a < dim) {
      double lo = std::floor(box.lo[a] / h - 1e-9);
      double hi = std::ceil(box.hi[a] / h + 1e-9);
      g.origin[a] = lo * h;
      g.n[a] = static_cast<int>(hi - lo) + 1;
    } else {
      g.origin[a] = 0.0;
      g.n[a] = 1;
    }
  }
  return g;
}

std::vector<std::array<int, 3>> Grid::axis_offsets() const {
  std::vector<std::array<int, 3>> out;
  for (int a = 0; a < dim; ++a) {
    std::array<int, 3> p{0, 0, 0}, m{0, 0, 0};
    p[a] = 1;
    m[a] = -1;
    out.push_back(p);
    out.push_back(m);
  }
  return out;
}

}  // namespace potkit
