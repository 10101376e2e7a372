#include "chemo/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chemo/error.hpp"

namespace chemo {

namespace {

// Neumaier summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void require_above_eta(const Field& v, const EnergyParams& ep) {
  const double lowest = min_field(v);
  if (lowest < ep.eta) {
    throw DomainError("energy evaluated with v below eta (min v = " + std::to_string(lowest) +
                      ", eta = " + std::to_string(ep.eta) + ")");
  }
}

}  // namespace

double mass(const Field& u, const Grid& grid) {
  CompensatedSum s;
  for (double x : u) s.add(x);
  return s.value() * grid.cell_volume();
}

double lp_norm(const Field& u, const Grid& grid, double p) {
  if (!(p >= 1.0)) throw ValidationError("lp_norm: p must be >= 1");
  CompensatedSum s;
  for (double x : u) s.add(std::pow(std::abs(x), p));
  return std::pow(s.value() * grid.cell_volume(), 1.0 / p);
}

double min_field(const Field& v) { return *std::min_element(v.begin(), v.end()); }

double linf(const Field& u) {
  double m = 0.0;
  for (double x : u) m = std::max(m, std::abs(x));
  return m;
}

double max_face_gradient(const Field& v, const Grid& grid) {
  double g = 0.0;
  const int nx = grid.nx();
  const int ny = grid.ny();
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      g = std::max(g, std::abs(v[grid.index(i + 1, j)] - v[grid.index(i, j)]) / grid.h[0]);
    }
  }
  if (grid.dim == 2) {
    for (int j = 0; j + 1 < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        g = std::max(g, std::abs(v[grid.index(i, j + 1)] - v[grid.index(i, j)]) / grid.h[1]);
      }
    }
  }
  return g;
}

double energy_functional(const Field& u, const Field& v, const Grid& grid,
                         const EnergyParams& ep, const SensitivityParams& sp) {
  require_above_eta(v, ep);
  CompensatedSum s;
  for (std::size_t i = 0; i < u.size(); ++i) {
    s.add(std::pow(u[i], ep.p) * weight(v[i], ep, sp));
  }
  return s.value() * grid.cell_volume();
}

double absorption_integral(const Field& u, const Field& v, const Grid& grid,
                           const EnergyParams& ep, const SensitivityParams& sp) {
  require_above_eta(v, ep);
  CompensatedSum s;
  for (std::size_t i = 0; i < u.size(); ++i) {
    s.add(std::pow(u[i], ep.p + 1.0) * weight(v[i], ep, sp) / std::pow(sp.a + v[i], sp.k));
  }
  return s.value() * grid.cell_volume();
}

MonitorSample sample_fields(const Field& u, const Field& v, const Grid& grid, double t,
                            double dt, const SampleSpec& spec) {
  MonitorSample m;
  m.t = t;
  m.dt = dt;
  m.mass = mass(u, grid);
  m.min_v = min_field(v);
  m.linf_u = linf(u);
  m.min_u = min_field(u);
  m.max_grad_v = max_face_gradient(v, grid);
  const double p = spec.energy ? spec.energy->p : 2.0;
  m.lp_u = lp_norm(u, grid, p);
  if (spec.energy && m.min_v >= spec.energy->eta && m.min_u >= 0.0) {
    m.energy = energy_functional(u, v, grid, *spec.energy, spec.sp);
    m.absorption = absorption_integral(u, v, grid, *spec.energy, spec.sp);
  }
  return m;
}

std::vector<ResidualPoint> energy_residual(std::span<const MonitorSample> window,
                                           const EnergyParams& ep, double c_const, double h,
                                           double c_tol) {
  if (window.size() < 3) {
    throw ValidationError("energy_residual: at least three samples required, got " +
                          std::to_string(window.size()));
  }
  std::vector<ResidualPoint> out;
  out.reserve(window.size() - 2);
  for (std::size_t i = 1; i + 1 < window.size(); ++i) {
    const MonitorSample& prev = window[i - 1];
    const MonitorSample& mid = window[i];
    const MonitorSample& next = window[i + 1];
    const double h1 = mid.t - prev.t;
    const double h2 = next.t - mid.t;
    if (!(h1 > 0.0) || !(h2 > 0.0)) {
      throw ValidationError("energy_residual: sample times must increase strictly");
    }
    const double dEdt = (h1 * h1 * next.energy - h2 * h2 * prev.energy +
                         (h2 * h2 - h1 * h1) * mid.energy) /
                        (h1 * h2 * (h1 + h2));
    const double rhs = c_const * mid.energy - ep.r * mid.absorption;
    const double tol = c_tol * (h * h + mid.dt) * std::max(std::abs(mid.energy), 1.0);
    out.push_back({i, mid.t, dEdt - rhs, tol});
  }
  return out;
}

double lower_bound_check(const Field& v, double eta) { return min_field(v) - eta; }

bool blow_up_suspect(const MonitorSample& sample, const BlowUpThresholds& limits) {
  return !(sample.linf_u <= limits.linf_u) || !(sample.max_grad_v <= limits.grad_v) ||
         sample.dt < limits.dt_min;
}

}  // namespace chemo
