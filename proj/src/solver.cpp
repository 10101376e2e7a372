#include "chemo/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "chemo/error.hpp"

namespace chemo {

std::string to_string(FluxScheme s) { return s == FluxScheme::Upwind ? "upwind" : "central"; }

std::string to_string(DiffusionStepping s) {
  return s == DiffusionStepping::ImplicitEuler ? "implicit-euler" : "explicit";
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Completed: return "completed";
    case RunStatus::BlowUpSuspected: return "blow-up-suspected";
    case RunStatus::Error: return "error";
  }
  return "error";
}

void SolverConfig::validate() const {
  sp.validate();
  if (!(cfl_diff > 0.0 && cfl_diff <= 1.0)) throw ValidationError("solver: cfl_diff must lie in (0, 1]");
  if (!(cfl_adv > 0.0 && cfl_adv <= 1.0)) throw ValidationError("solver: cfl_adv must lie in (0, 1]");
  if (!(dt_min > 0.0)) throw ValidationError("solver: dt_min must be positive");
  if (!(dt_min < dt_max)) throw ValidationError("solver: dt_min must be smaller than dt_max");
  if (!(cg_tol > 0.0 && cg_tol < 1.0)) throw ValidationError("solver: cg_tol must lie in (0, 1)");
  if (cg_max_iter < 1) throw ValidationError("solver: cg_max_iter must be positive");
  if (!(blow_up_factor > 1.0)) throw ValidationError("solver: blow_up_factor must exceed 1");
  if (!(grad_threshold > 0.0)) throw ValidationError("solver: grad_threshold must be positive");
}

SimState SimState::make(const Grid& grid, Field u, Field v) {
  grid.validate();
  if (u.size() != grid.size() || v.size() != grid.size()) {
    throw ValidationError("state: fields do not match the grid");
  }
  if (min_field(u) < 0.0) throw ValidationError("state: u must be nonnegative");
  if (min_field(v) < 0.0) throw ValidationError("state: v must be nonnegative");
  SimState s;
  s.grid = grid;
  s.u = std::move(u);
  s.v = std::move(v);
  s.conserved_mass = mass(s.u, grid);
  return s;
}

namespace {

// out = alpha f - beta Lap f.
void apply_shifted(double alpha, double beta, const Field& f, Field& out, const Grid& grid) {
  const int nx = grid.nx();
  const int ny = grid.ny();
  const double cx = beta / (grid.h[0] * grid.h[0]);
  const double cy = grid.dim == 2 ? beta / (grid.h[1] * grid.h[1]) : 0.0;
  for (int j = 0; j < ny; ++j) {
    const std::size_t row = static_cast<std::size_t>(nx) * j;
    for (int i = 0; i < nx; ++i) {
      const std::size_t c = row + i;
      const double fc = f[c];
      double acc = alpha * fc;
      if (i > 0) acc += cx * (fc - f[c - 1]);
      if (i + 1 < nx) acc += cx * (fc - f[c + 1]);
      if (grid.dim == 2) {
        if (j > 0) acc += cy * (fc - f[c - nx]);
        if (j + 1 < ny) acc += cy * (fc - f[c + nx]);
      }
      out[c] = acc;
    }
  }
}

double dot(const Field& a, const Field& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double singular_guard(double v_face, const SensitivityParams& sp) {
  if (sp.a == 0.0 && !(v_face > 0.0)) {
    throw DomainError("chemotactic flux: nonpositive face value of v with a = 0");
  }
  return chi_upper(v_face, sp);
}

}  // namespace

Field laplacian_neumann(const Field& f, const Grid& grid) {
  Field out(f.size());
  apply_shifted(0.0, -1.0, f, out, grid);
  return out;
}

FaceFlux chemotactic_flux(const Field& u, const Field& v, const Grid& grid,
                          const SensitivityParams& sp, FluxScheme scheme) {
  const int nx = grid.nx();
  const int ny = grid.ny();
  FaceFlux flux;
  flux.x.assign(static_cast<std::size_t>(nx + 1) * ny, 0.0);
  if (grid.dim == 2) flux.y.assign(static_cast<std::size_t>(nx) * (ny + 1), 0.0);
  if (sp.K == 0.0) return flux;

  auto face = [&](std::size_t left, std::size_t right, double h) {
    const double w = singular_guard(0.5 * (v[left] + v[right]), sp) * (v[right] - v[left]) / h;
    flux.max_speed = std::max(flux.max_speed, std::abs(w));
    const double carried =
        scheme == FluxScheme::Upwind ? (w > 0.0 ? u[left] : u[right]) : 0.5 * (u[left] + u[right]);
    return carried * w;
  };

  for (int j = 0; j < ny; ++j) {
    for (int i = 1; i < nx; ++i) {
      flux.x[static_cast<std::size_t>(i) + static_cast<std::size_t>(nx + 1) * j] =
          face(grid.index(i - 1, j), grid.index(i, j), grid.h[0]);
    }
  }
  if (grid.dim == 2) {
    for (int j = 1; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        flux.y[grid.index(i, j)] = face(grid.index(i, j - 1), grid.index(i, j), grid.h[1]);
      }
    }
  }
  return flux;
}

Field flux_divergence(const FaceFlux& flux, const Grid& grid) {
  const int nx = grid.nx();
  const int ny = grid.ny();
  Field div(grid.size());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t fx = static_cast<std::size_t>(i) + static_cast<std::size_t>(nx + 1) * j;
      double d = (flux.x[fx + 1] - flux.x[fx]) / grid.h[0];
      if (grid.dim == 2) d += (flux.y[grid.index(i, j + 1)] - flux.y[grid.index(i, j)]) / grid.h[1];
      div[grid.index(i, j)] = d;
    }
  }
  return div;
}

CgResult solve_shifted_laplacian(double alpha, double beta, const Field& rhs, Field& x,
                                 const Grid& grid, double tol, int max_iter) {
  const std::size_t n = rhs.size();
  x.resize(n);
  const double bnorm = std::sqrt(dot(rhs, rhs));
  CgResult res;
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return res;
  }
  Field r(n), p(n), ap(n);
  apply_shifted(alpha, beta, x, ap, grid);
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - ap[i];
  double rr = dot(r, r);
  const double target = tol * bnorm;
  p = r;
  while (std::sqrt(rr) > target) {
    if (res.iterations >= max_iter) {
      throw NumericalError("CG: no convergence in " + std::to_string(max_iter) +
                           " iterations (relative residual " + std::to_string(std::sqrt(rr) / bnorm) + ")");
    }
    apply_shifted(alpha, beta, p, ap, grid);
    const double step = rr / dot(p, ap);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += step * p[i];
      r[i] -= step * ap[i];
    }
    const double rr_next = dot(r, r);
    const double beta_cg = rr_next / rr;
    rr = rr_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta_cg * p[i];
    ++res.iterations;
  }
  res.relative_residual = std::sqrt(rr) / bnorm;
  return res;
}

double stable_dt(const SimState& state, const SolverConfig& config, double max_speed) {
  double dt = config.dt_max;
  const double h = state.grid.min_spacing();
  if (config.u_diffusion == DiffusionStepping::Explicit) {
    dt = std::min(dt, config.cfl_diff * h * h / (2.0 * state.grid.dim));
  }
  if (max_speed > 0.0) dt = std::min(dt, config.cfl_adv * h / max_speed);
  if (!(dt >= config.dt_min)) {
    throw StepUnderflow("time step " + std::to_string(dt) + " fell below dt_min at t = " +
                        std::to_string(state.t));
  }
  return dt;
}

void advect_explicit(Field& u, const Field& v, const Grid& grid, const SensitivityParams& sp,
                     FluxScheme scheme, double dt) {
  const Field div = flux_divergence(chemotactic_flux(u, v, grid, sp, scheme), grid);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] -= dt * div[i];
}

void step_in_place(SimState& state, const SolverConfig& config, double dt_cap) {
  const Grid& grid = state.grid;
  const FaceFlux flux = chemotactic_flux(state.u, state.v, grid, config.sp, config.flux_scheme);
  const double dt_policy = stable_dt(state, config, flux.max_speed);
  const double dt = std::min(dt_policy, dt_cap);

  // Signal: ((1 + dt) I - dt Lap) v' = v + dt u.
  Field rhs_v(grid.size());
  for (std::size_t i = 0; i < rhs_v.size(); ++i) rhs_v[i] = state.v[i] + dt * state.u[i];
  Field v_next = state.v;
  state.cg_iterations +=
      solve_shifted_laplacian(1.0 + dt, dt, rhs_v, v_next, grid, config.cg_tol, config.cg_max_iter).iterations;

  // Density: explicit advection, then diffusion.
  const Field div = flux_divergence(flux, grid);
  Field u_star(grid.size());
  for (std::size_t i = 0; i < u_star.size(); ++i) u_star[i] = state.u[i] - dt * div[i];
  Field u_next;
  if (config.u_diffusion == DiffusionStepping::ImplicitEuler) {
    u_next = u_star;
    state.cg_iterations +=
        solve_shifted_laplacian(1.0, dt, u_star, u_next, grid, config.cg_tol, config.cg_max_iter).iterations;
  } else {
    const Field lap = laplacian_neumann(state.u, grid);
    u_next = u_star;
    for (std::size_t i = 0; i < u_next.size(); ++i) u_next[i] += dt * lap[i];
  }
  // Remove the CG residual's contribution to the total mass.
  const double shift = (state.conserved_mass - mass(u_next, grid)) /
                       (grid.cell_volume() * static_cast<double>(grid.size()));
  for (double& x : u_next) x += shift;
  if (state.conserved_mass > 0.0) {
    state.max_mass_projection =
        std::max(state.max_mass_projection,
                 std::abs(shift) * grid.domain_volume() / state.conserved_mass);
  }

  state.u = std::move(u_next);
  state.v = std::move(v_next);
  state.t += dt;
  state.dt = dt_policy;
  ++state.steps;
}

SimState step(const SimState& state, const SolverConfig& config) {
  SimState next = state;
  step_in_place(next, config);
  return next;
}

RunReport run(const SimState& initial, const SolverConfig& config, const RunOptions& opts) {
  config.validate();
  if (!(opts.horizon > 0.0)) throw ValidationError("run: horizon must be positive");
  if (opts.cadence < 1) throw ValidationError("run: cadence must be >= 1");
  if (!(linf(initial.u) > 0.0)) throw ValidationError("run: u0 must not vanish identically");
  if (config.sp.a == 0.0 && config.sp.K > 0.0 && !(min_field(initial.v) > 0.0)) {
    throw ValidationError("run: v0 must be strictly positive when a = 0");
  }

  RunReport report;
  SimState s = initial;
  const BlowUpThresholds limits{config.blow_up_factor * linf(initial.u), config.grad_threshold,
                                config.dt_min};

  auto record = [&]() -> const MonitorSample& {
    report.samples.push_back(sample_fields(s.u, s.v, s.grid, s.t, s.dt, opts.sample));
    if (opts.observer) opts.observer(s, report.samples.back());
    return report.samples.back();
  };

  try {
    if (s.dt == 0.0) {
      const FaceFlux flux = chemotactic_flux(s.u, s.v, s.grid, config.sp, config.flux_scheme);
      s.dt = stable_dt(s, config, flux.max_speed);
    }
    record();
    const double end_tol = 1e-12 * opts.horizon;
    while (s.t < opts.horizon - end_tol) {
      step_in_place(s, config, opts.horizon - s.t);
      const bool done = !(s.t < opts.horizon - end_tol);
      if (done) s.t = opts.horizon;
      if (!(linf(s.u) <= limits.linf_u)) {
        record();
        report.status = RunStatus::BlowUpSuspected;
        report.message = "L^inf(u) exceeded the blow-up threshold at t = " + std::to_string(s.t);
        break;
      }
      if (done || s.steps % opts.cadence == 0) {
        if (blow_up_suspect(record(), limits)) {
          report.status = RunStatus::BlowUpSuspected;
          report.message = "blow-up indicator tripped at t = " + std::to_string(s.t);
          break;
        }
      }
    }
  } catch (const StepUnderflow& e) {
    s.dt = 0.0;
    record();
    report.status = RunStatus::BlowUpSuspected;
    report.message = e.what();
  } catch (const Error& e) {
    report.status = RunStatus::Error;
    report.message = e.what();
  }

  report.steps = s.steps;
  report.cg_iterations = s.cg_iterations;
  report.final_time = s.t;
  report.max_mass_projection = s.max_mass_projection;
  report.final_state = std::move(s);
  return report;
}

}  // namespace chemo
