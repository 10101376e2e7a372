#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <vector>

namespace chemo {

using Field = std::vector<double>;

// Uniform cell-centred grid on [0, Lx] or [0, Lx] x [0, Ly]. Cells are stored
// x-fastest: index = i + nx * j. In 1D the y axis is a single unit-width cell.
struct Grid {
  int dim = 1;
  std::array<double, 2> extent{1.0, 1.0};
  std::array<int, 2> cells{8, 1};
  std::array<double, 2> h{0.125, 1.0};

  static Grid line(double length, int n);
  static Grid rectangle(double lx, double ly, int nx, int ny);

  std::size_t size() const { return static_cast<std::size_t>(cells[0]) * cells[1]; }
  int nx() const { return cells[0]; }
  int ny() const { return cells[1]; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) + static_cast<std::size_t>(cells[0]) * j; }
  double cell_volume() const { return dim == 1 ? h[0] : h[0] * h[1]; }
  double domain_volume() const { return dim == 1 ? extent[0] : extent[0] * extent[1]; }
  double min_spacing() const { return dim == 1 ? h[0] : std::min(h[0], h[1]); }
  double max_spacing() const { return dim == 1 ? h[0] : std::max(h[0], h[1]); }
  // Largest distance between two points of the closed domain.
  double diameter() const;
  double center_x(int i) const { return (i + 0.5) * h[0]; }
  double center_y(int j) const { return (j + 0.5) * h[1]; }

  // Same extents, cells multiplied by `factor` on every active axis.
  Grid refined(int factor) const;

  void validate() const;
};

// Averages blocks of factor (1D) or factor x factor (2D) fine cells onto
// the coarse grid `fine.refined(1/factor)`.
Field restrict_average(const Field& fine, const Grid& fine_grid, int factor);

}  // namespace chemo
