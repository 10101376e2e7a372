#pragma once

// Cell-centred finite volumes for
//   u_t = Delta u - div(u chi(v) grad v),   v_t = Delta v + u - v
// with zero-flux boundaries on 1D intervals and 2D rectangles.
//
// A step advances v by implicit Euler and u by explicit upwind advection
// followed by implicit (or explicit) diffusion. Both sub-steps use the fields
// at the start of the step, so the advective CFL bound is exact. The u update
// preserves mass exactly: the implicit diffusion operator maps constants to
// constants, and the CG solution is shifted to the conserved mass.

#include <functional>
#include <limits>
#include <string>

#include "chemo/diagnostics.hpp"
#include "chemo/grid.hpp"
#include "chemo/sensitivity.hpp"

namespace chemo {

enum class FluxScheme { Upwind, Central };
enum class DiffusionStepping { ImplicitEuler, Explicit };

std::string to_string(FluxScheme s);
std::string to_string(DiffusionStepping s);

struct SolverConfig {
  SensitivityParams sp;
  double cfl_diff = 0.9;   // explicit diffusion: dt <= cfl_diff h^2 / (2 dim)
  double cfl_adv = 0.25;   // dt <= cfl_adv h / max|w|; <= 1/(2 dim) keeps u >= 0
  double dt_max = 1e-2;
  double dt_min = 1e-10;
  FluxScheme flux_scheme = FluxScheme::Upwind;
  DiffusionStepping u_diffusion = DiffusionStepping::ImplicitEuler;
  double cg_tol = 1e-10;
  int cg_max_iter = 20000;
  double blow_up_factor = 1e6;   // L^inf(u) threshold relative to the initial max
  double grad_threshold = 1e12;  // max face gradient of v

  void validate() const;
};

struct SimState {
  Grid grid;
  Field u;
  Field v;
  double t = 0.0;
  double dt = 0.0;         // last policy step
  double conserved_mass = 0.0;
  long steps = 0;
  long cg_iterations = 0;
  double max_mass_projection = 0.0;  // largest relative shift applied after a u solve

  // Checks shapes and sign constraints; records the conserved mass.
  static SimState make(const Grid& grid, Field u, Field v);
};

// Face fluxes of u chi(v) grad v. x faces are (nx+1) x ny, index i + (nx+1) j
// with face i between cells i-1 and i; y faces are nx x (ny+1). Boundary
// faces carry zero flux.
struct FaceFlux {
  Field x;
  Field y;
  double max_speed = 0.0;  // max |chi(v_face) dv/dn|
};

Field laplacian_neumann(const Field& f, const Grid& grid);

// Throws DomainError for a face mean v <= 0 when a = 0.
FaceFlux chemotactic_flux(const Field& u, const Field& v, const Grid& grid,
                          const SensitivityParams& sp, FluxScheme scheme);

Field flux_divergence(const FaceFlux& flux, const Grid& grid);

struct CgResult {
  int iterations = 0;
  double relative_residual = 0.0;
};

// Solves (alpha I - beta Delta) x = rhs by conjugate gradients, x holding the
// initial guess. Throws NumericalError without convergence to `tol`
// (relative to |rhs|).
CgResult solve_shifted_laplacian(double alpha, double beta, const Field& rhs, Field& x,
                                 const Grid& grid, double tol, int max_iter);

// Step size allowed by the configuration for the current state.
// Throws StepUnderflow when it is below dt_min.
double stable_dt(const SimState& state, const SolverConfig& config, double max_speed);

// u <- u - dt div F(u, v). Exposed for the advection benchmark.
void advect_explicit(Field& u, const Field& v, const Grid& grid, const SensitivityParams& sp,
                     FluxScheme scheme, double dt);

// One step of at most `dt_cap` (the policy step otherwise); returns the state.
void step_in_place(SimState& state, const SolverConfig& config,
                   double dt_cap = std::numeric_limits<double>::infinity());
SimState step(const SimState& state, const SolverConfig& config);

enum class RunStatus { Completed, BlowUpSuspected, Error };
std::string to_string(RunStatus s);

struct RunReport {
  std::vector<MonitorSample> samples;
  RunStatus status = RunStatus::Completed;
  std::string message;
  long steps = 0;
  long cg_iterations = 0;
  double final_time = 0.0;
  double max_mass_projection = 0.0;
  int threads = 1;
  SimState final_state;
};

struct RunOptions {
  double horizon = 1.0;
  int cadence = 10;  // steps between samples
  SampleSpec sample;
  // Observer called with every sampled state.
  std::function<void(const SimState&, const MonitorSample&)> observer;
};

// Advances to the horizon; samples at t = 0, every `cadence` steps and at the
// final time. Stops early with BlowUpSuspected on dt underflow or a threshold
// crossing (the last sample is the terminal record), and with Error on any
// other failure.
RunReport run(const SimState& initial, const SolverConfig& config, const RunOptions& opts);

}  // namespace chemo
