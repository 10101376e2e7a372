#include <cmath>

#include "chemo/diagnostics.hpp"
#include "chemo/error.hpp"
#include "chemo/experiments.hpp"

namespace chemo {

namespace {

double coordinate(const Grid& g, std::size_t c, int axis) {
  const int i = static_cast<int>(c % static_cast<std::size_t>(g.nx()));
  const int j = static_cast<int>(c / static_cast<std::size_t>(g.nx()));
  return axis == 0 ? g.center_x(i) : g.center_y(j);
}

double gaussian(const Grid& g, std::size_t c, const std::array<double, 2>& centre, double width) {
  double r2 = 0.0;
  for (int axis = 0; axis < g.dim; ++axis) {
    const double d = coordinate(g, c, axis) - centre[static_cast<std::size_t>(axis)];
    r2 += d * d;
  }
  return std::exp(-r2 / (width * width));
}

}  // namespace

std::pair<Field, Field> initial_data(const InitialSpec& spec, const Grid& grid,
                                     const SensitivityParams& sp) {
  const std::size_t n = grid.size();
  Field u(n), v(n);
  switch (spec.preset) {
    case Preset::Uniform:
      std::fill(u.begin(), u.end(), spec.u_value);
      std::fill(v.begin(), v.end(), spec.v_value);
      break;
    case Preset::GaussianBump:
    case Preset::TwoBumps: {
      Field shape(n);
      for (std::size_t c = 0; c < n; ++c) {
        shape[c] = spec.preset == Preset::GaussianBump
                       ? gaussian(grid, c, spec.center, spec.width)
                       : gaussian(grid, c, spec.centers[0], spec.width) +
                             gaussian(grid, c, spec.centers[1], spec.width);
        v[c] = spec.v_floor + spec.v_bump * shape[c];
        u[c] = spec.background + shape[c];
      }
      const double m = mass(u, grid);
      if (!(m > 0.0)) throw ValidationError("initial: bump has no resolved mass on this grid");
      for (double& x : u) x *= spec.mass / m;
      break;
    }
    case Preset::Checker:
      for (std::size_t c = 0; c < n; ++c) {
        long parity = 0;
        for (int axis = 0; axis < grid.dim; ++axis) {
          const double frac = coordinate(grid, c, axis) / grid.extent[static_cast<std::size_t>(axis)];
          parity += static_cast<long>(std::floor(frac * spec.squares));
        }
        u[c] = parity % 2 == 0 ? spec.u_high : spec.u_low;
        v[c] = spec.v_floor;
      }
      break;
  }
  if (min_field(u) < 0.0) throw ValidationError("initial: u0 must be nonnegative");
  if (!(linf(u) > 0.0)) throw ValidationError("initial: u0 must not vanish identically");
  if (min_field(v) < 0.0) throw ValidationError("initial: v0 must be nonnegative");
  if (sp.a == 0.0 && sp.K > 0.0 && !(min_field(v) > 0.0)) {
    throw ValidationError("initial: v0 must be strictly positive when a = 0");
  }
  return {std::move(u), std::move(v)};
}

}  // namespace chemo
