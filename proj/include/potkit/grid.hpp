#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "potkit/point.hpp"

namespace potkit {

// Uniform lattice of nodes origin + (i, j, k) h; unused axes have extent 1.
struct Grid {
  int dim = 2;
  Point origin;
  double h = 1.0;
  std::array<int, 3> n{1, 1, 1};

  // Smallest lattice aligned to multiples of h that covers the box.
  static Grid covering(const Box& box, double h, int dim);

  std::size_t size() const { return static_cast<std::size_t>(n[0]) * n[1] * n[2]; }
  std::size_t index(int i, int j = 0, int k = 0) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(n[0]) * (j + static_cast<std::size_t>(n[1]) * k);
  }
  std::array<int, 3> coords(std::size_t idx) const {
    int i = static_cast<int>(idx % n[0]);
    std::size_t r = idx / n[0];
    return {i, static_cast<int>(r % n[1]), static_cast<int>(r / n[1])};
  }
  Point point(std::size_t idx) const {
    auto c = coords(idx);
    return {origin.x + c[0] * h, origin.y + c[1] * h, origin.z + c[2] * h};
  }
  bool in_range(int i, int j, int k) const {
    return i >= 0 && j >= 0 && k >= 0 && i < n[0] && j < n[1] && k < n[2];
  }
  Box bounds() const {
    return {origin, {origin.x + (n[0] - 1) * h, origin.y + (n[1] - 1) * h, origin.z + (n[2] - 1) * h}};
  }
  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= h;
    return v;
  }
  // Neighbour offsets along active axes: +-1 per axis (2d entries).
  std::vector<std::array<int, 3>> axis_offsets() const;
};

using Mask = std::vector<std::uint8_t>;

}  // namespace potkit
