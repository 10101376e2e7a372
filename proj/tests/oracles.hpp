#pragma once

// Reference computations used by the tests. Deliberately naive and
// independent of the library implementations.

#include <cmath>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <string>

namespace oracle {

// Composite Simpson rule with a fixed, even number of panels.
inline double simpson(const std::function<double(double)>& f, double lo, double hi, long panels) {
  if (panels % 2) ++panels;
  const double h = (hi - lo) / static_cast<double>(panels);
  long double acc = f(lo) + f(hi);
  for (long i = 1; i < panels; ++i) {
    acc += (i % 2 ? 4.0L : 2.0L) * f(lo + h * static_cast<double>(i));
  }
  return static_cast<double>(acc * h / 3.0L);
}

// -r int_eta^s (a + t)^-k dt, integrated in x = ln(a + t) where the
// integrand exp((1 - k) x) is smooth.
inline double g_by_quadrature(double s, double r, double k, double a, double eta, long panels = 4000) {
  if (s == eta) return 0.0;
  const double lo = std::log(a + eta), hi = std::log(a + s);
  return -r * simpson([k](double x) { return std::exp((1.0 - k) * x); }, lo, hi, panels);
}

// H_eps(s) written out term by term.
inline double H(double s, double p, double r, double eps, double K, double k, double a) {
  const double A = a + s;
  const double A2k = std::pow(A, 2.0 * k);
  return (eps * p + 1.0 - eps) * r * r / ((1.0 - eps) * (p - 1.0) * A2k) +
         eps * p * K * r / ((1.0 - eps) * A2k) - k * r / std::pow(A, k + 1.0) +
         p * (p - 1.0) * K * K / (4.0 * (1.0 - eps) * A2k);
}

inline double heat_tail_integrand(double s, int n, double diam) {
  if (s <= 0.0) return 0.0;
  return std::pow(4.0 * std::numbers::pi * s, -0.5 * n) * std::exp(-(s + diam * diam / (4.0 * s)));
}

// max_tau min(first, second) over a uniform tau grid, refined twice around
// the best grid point.
inline double dense_sup_min(const std::function<double(double)>& first,
                            const std::function<double(double)>& second, double tau_hi, int points = 20000) {
  double lo = 0.0, hi = tau_hi, best_tau = 0.0, best = -1.0;
  for (int round = 0; round < 3; ++round) {
    const double step = (hi - lo) / points;
    for (int i = 1; i <= points; ++i) {
      const double tau = lo + step * i;
      const double m = std::min(first(tau), second(tau));
      if (m > best) {
        best = m;
        best_tau = tau;
      }
    }
    lo = std::max(0.0, best_tau - 2.0 * step);
    hi = best_tau + 2.0 * step;
  }
  return best;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("chemolab_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oracle
