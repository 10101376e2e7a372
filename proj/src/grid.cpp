#include "chemo/grid.hpp"

#include <cmath>
#include <string>

#include "chemo/error.hpp"

namespace chemo {

Grid Grid::line(double length, int n) {
  Grid g;
  g.dim = 1;
  g.extent = {length, 1.0};
  g.cells = {n, 1};
  g.h = {length / n, 1.0};
  g.validate();
  return g;
}

Grid Grid::rectangle(double lx, double ly, int nx, int ny) {
  Grid g;
  g.dim = 2;
  g.extent = {lx, ly};
  g.cells = {nx, ny};
  g.h = {lx / nx, ly / ny};
  g.validate();
  return g;
}

double Grid::diameter() const {
  return dim == 1 ? extent[0] : std::hypot(extent[0], extent[1]);
}

Grid Grid::refined(int factor) const {
  return dim == 1 ? line(extent[0], cells[0] * factor)
                  : rectangle(extent[0], extent[1], cells[0] * factor, cells[1] * factor);
}

void Grid::validate() const {
  if (dim != 1 && dim != 2) throw ValidationError("grid: dim must be 1 or 2");
  for (int axis = 0; axis < dim; ++axis) {
    if (!(extent[axis] > 0.0)) throw ValidationError("grid: extents must be positive");
    if (cells[axis] < 8) {
      throw ValidationError("grid: at least 8 cells per axis required, got " +
                            std::to_string(cells[axis]));
    }
  }
}

Field restrict_average(const Field& fine, const Grid& fine_grid, int factor) {
  const int nx = fine_grid.nx() / factor;
  const int ny = fine_grid.dim == 1 ? 1 : fine_grid.ny() / factor;
  const int fy = fine_grid.dim == 1 ? 1 : factor;
  if (nx * factor != fine_grid.nx() || ny * fy != fine_grid.ny()) {
    throw ValidationError("restrict_average: cell counts not divisible by factor");
  }
  Field coarse(static_cast<std::size_t>(nx) * ny, 0.0);
  const double w = 1.0 / (factor * fy);
  for (int j = 0; j < fine_grid.ny(); ++j) {
    for (int i = 0; i < fine_grid.nx(); ++i) {
      coarse[static_cast<std::size_t>(i / factor) + static_cast<std::size_t>(nx) * (j / fy)] +=
          w * fine[fine_grid.index(i, j)];
    }
  }
  return coarse;
}

}  // namespace chemo
