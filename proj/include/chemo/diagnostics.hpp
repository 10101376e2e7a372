#pragma once

// Monitored quantities of a run: mass, signal minimum, norms of u, the
// weighted energy int u^p phi(v) and the residual of its differential
// inequality.

#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "chemo/grid.hpp"
#include "chemo/sensitivity.hpp"

namespace chemo {

struct MonitorSample {
  double t = 0.0;
  double mass = 0.0;
  double min_v = 0.0;
  double linf_u = 0.0;
  double lp_u = 0.0;
  double energy = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
  double dt = 0.0;
  // Not part of the CSV schema.
  double absorption = std::numeric_limits<double>::quiet_NaN();  // sum u^(p+1) phi(v) (a+v)^-k vol
  double max_grad_v = 0.0;
  double min_u = 0.0;
};

struct BlowUpThresholds {
  double linf_u = std::numeric_limits<double>::infinity();
  double grad_v = std::numeric_limits<double>::infinity();
  double dt_min = 0.0;
};

// Compensated sum of u * cell volume.
double mass(const Field& u, const Grid& grid);
double lp_norm(const Field& u, const Grid& grid, double p);
double min_field(const Field& v);
double linf(const Field& u);
// Largest |difference / spacing| over interior faces.
double max_face_gradient(const Field& v, const Grid& grid);

// sum u^p phi(v) vol. Throws DomainError if any v < eta.
double energy_functional(const Field& u, const Field& v, const Grid& grid,
                         const EnergyParams& ep, const SensitivityParams& sp);
// sum u^(p+1) phi(v) (a+v)^-k vol.
double absorption_integral(const Field& u, const Field& v, const Grid& grid,
                           const EnergyParams& ep, const SensitivityParams& sp);

struct SampleSpec {
  SensitivityParams sp;
  std::optional<EnergyParams> energy;  // lp_u uses energy->p, else p = 2
};

// Energy and absorption are NaN when v dips below eta.
MonitorSample sample_fields(const Field& u, const Field& v, const Grid& grid, double t,
                            double dt, const SampleSpec& spec);

struct ResidualPoint {
  std::size_t index;  // into the sample window
  double t;
  double residual;
  double tolerance;
  bool within() const { return residual <= tolerance; }
};

// Three-point derivative of the energy at every interior sample, minus
// c E - r * absorption. Non-uniform spacing uses the second-order
// three-point formula. Tolerance: c_tol (h^2 + dt) max(|E|, 1) with dt of the
// centre sample. Throws ValidationError with fewer than three samples.
std::vector<ResidualPoint> energy_residual(std::span<const MonitorSample> window,
                                           const EnergyParams& ep, double c_const, double h,
                                           double c_tol = 10.0);

// min v - eta.
double lower_bound_check(const Field& v, double eta);

bool blow_up_suspect(const MonitorSample& sample, const BlowUpThresholds& limits);

}  // namespace chemo
