#include <cmath>
#include <numbers>

#include "chemo/diagnostics.hpp"
#include "chemo/error.hpp"
#include "chemo/experiments.hpp"

namespace chemo {

using nlohmann::json;

namespace {

double l2_distance(const Field& a, const Field& b, const Grid& g) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc * g.cell_volume());
}

// cos(pi x / Lx) (times cos(pi y / Ly) in 2D) at cell centres.
Field cosine_mode(const Grid& g) {
  Field m(g.size());
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      double x = std::cos(std::numbers::pi * g.center_x(i) / g.extent[0]);
      if (g.dim == 2) x *= std::cos(std::numbers::pi * g.center_y(j) / g.extent[1]);
      m[g.index(i, j)] = x;
    }
  }
  return m;
}

struct LevelResult {
  Field u;
  double dt;
  std::optional<double> error;
};

LevelResult heat_level(const ExperimentConfig& c, const Grid& g) {
  const ConvergenceSpec& cv = c.convergence;
  const Field mode = cosine_mode(g);
  Field u(g.size()), v(g.size(), 1.0);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = 1.0 + cv.amplitude * mode[i];

  SolverConfig solver = c.solver;
  solver.sp = c.sp;
  solver.sp.K = 0.0;
  solver.u_diffusion = DiffusionStepping::ImplicitEuler;
  solver.dt_max = cv.dt;
  solver.dt_min = std::min(solver.dt_min, 0.5 * cv.dt);
  SimState s = SimState::make(g, std::move(u), std::move(v));
  const long steps = std::lround(c.horizon / cv.dt);
  if (steps < 1 || std::abs(steps * cv.dt - c.horizon) > 1e-9 * c.horizon) {
    throw ValidationError("convergence: horizon must be a whole number of convergence.dt steps");
  }
  for (long n = 0; n < steps; ++n) step_in_place(s, solver, cv.dt);

  double lambda = std::pow(std::numbers::pi / g.extent[0], 2);
  if (g.dim == 2) lambda += std::pow(std::numbers::pi / g.extent[1], 2);
  Field exact(g.size());
  for (std::size_t i = 0; i < exact.size(); ++i) {
    exact[i] = 1.0 + cv.amplitude * std::exp(-lambda * c.horizon) * mode[i];
  }
  const double err = l2_distance(s.u, exact, g);
  return {std::move(s.u), cv.dt, err};
}

LevelResult advection_level(const ExperimentConfig& c, const Grid& g) {
  const ConvergenceSpec& cv = c.convergence;
  if (!(c.sp.K > 0.0)) throw ValidationError("convergence: upwind-advection needs K > 0");
  Field u(g.size()), v(g.size());
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const double m = std::cos(std::numbers::pi * g.center_x(i) / g.extent[0]);
      u[g.index(i, j)] = 1.0 + cv.amplitude * m;
      v[g.index(i, j)] = c.initial.v_floor + cv.v_amplitude * m;
    }
  }
  if (min_field(v) <= 0.0 && c.sp.a == 0.0) {
    throw ValidationError("convergence: frozen v must stay positive (v_floor > v_amplitude)");
  }
  const double speed = chemotactic_flux(u, v, g, c.sp, FluxScheme::Upwind).max_speed;
  if (!(speed > 0.0)) throw ValidationError("convergence: frozen v produces no advection");
  const double dt_cfl = cv.cfl * g.min_spacing() / speed;
  const long steps = static_cast<long>(std::ceil(c.horizon / dt_cfl));
  const double dt = c.horizon / static_cast<double>(steps);
  for (long n = 0; n < steps; ++n) advect_explicit(u, v, g, c.sp, FluxScheme::Upwind, dt);
  return {std::move(u), dt, std::nullopt};
}

}  // namespace

OrderReport convergence_study(const ExperimentConfig& config, int levels) {
  if (levels < 3) throw ValidationError("convergence: at least three levels are needed");
  OrderReport rep;
  rep.benchmark = config.convergence.benchmark;
  std::vector<Grid> grids;
  std::vector<LevelResult> results;
  Grid g = config.grid.make();
  for (int l = 0; l < levels; ++l) {
    grids.push_back(g);
    results.push_back(rep.benchmark == Benchmark::HeatEigenfunction ? heat_level(config, g)
                                                                    : advection_level(config, g));
    g = g.refined(2);
  }
  for (int l = 0; l < levels; ++l) {
    ConvergenceLevel lvl;
    lvl.cells = grids[l].nx();
    lvl.h = grids[l].h[0];
    lvl.dt = results[l].dt;
    lvl.error_vs_exact = results[l].error;
    if (l + 1 < levels) {
      lvl.diff_to_next = l2_distance(results[l].u, restrict_average(results[l + 1].u, grids[l + 1], 2), grids[l]);
    }
    rep.levels.push_back(lvl);
  }
  for (int l = 0; l + 2 < levels; ++l) {
    const double a = *rep.levels[l].diff_to_next;
    const double b = *rep.levels[l + 1].diff_to_next;
    rep.orders.push_back(std::log2(a / b));
    if (!(b < a)) rep.monotone = false;
  }
  for (int l = 0; l + 1 < levels; ++l) {
    if (rep.levels[l].error_vs_exact && rep.levels[l + 1].error_vs_exact) {
      rep.exact_orders.push_back(std::log2(*rep.levels[l].error_vs_exact / *rep.levels[l + 1].error_vs_exact));
    }
  }
  rep.observed_order = rep.orders.back();
  return rep;
}

json to_json(const OrderReport& r) {
  json levels = json::array();
  for (const ConvergenceLevel& l : r.levels) {
    json j = {{"cells", l.cells}, {"h", l.h}, {"dt", l.dt}};
    j["error_vs_exact"] = l.error_vs_exact ? json(*l.error_vs_exact) : json(nullptr);
    j["diff_to_next"] = l.diff_to_next ? json(*l.diff_to_next) : json(nullptr);
    levels.push_back(j);
  }
  return {{"benchmark", to_string(r.benchmark)}, {"levels", levels},        {"orders", r.orders},
          {"exact_orders", r.exact_orders},      {"observed_order", r.observed_order},
          {"monotone", r.monotone}};
}

}  // namespace chemo
