#include "chemo/numerics.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "chemo/error.hpp"

namespace chemo::numerics {

namespace {

struct Panel {
  double lo, mid, hi;
  double f_lo, f_mid, f_hi;
  double whole;
};

double simpson(double lo, double hi, double f_lo, double f_mid, double f_hi) {
  return (hi - lo) / 6.0 * (f_lo + 4.0 * f_mid + f_hi);
}

double refine(const std::function<double(double)>& f, const Panel& p, double tol,
              int depth, int max_depth) {
  const double left_mid = 0.5 * (p.lo + p.mid);
  const double right_mid = 0.5 * (p.mid + p.hi);
  const double f_lm = f(left_mid);
  const double f_rm = f(right_mid);
  const double left = simpson(p.lo, p.mid, p.f_lo, f_lm, p.f_mid);
  const double right = simpson(p.mid, p.hi, p.f_mid, f_rm, p.f_hi);
  const double delta = left + right - p.whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth >= max_depth) {
    throw NumericalError("adaptive quadrature: tolerance not met within depth cap " +
                         std::to_string(max_depth));
  }
  const Panel lp{p.lo, left_mid, p.mid, p.f_lo, f_lm, p.f_mid, left};
  const Panel rp{p.mid, right_mid, p.hi, p.f_mid, f_rm, p.f_hi, right};
  return refine(f, lp, 0.5 * tol, depth + 1, max_depth) +
         refine(f, rp, 0.5 * tol, depth + 1, max_depth);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double lo, double hi,
                 const QuadratureOptions& opts) {
  if (hi == lo) return 0.0;
  if (hi < lo) return -integrate(f, hi, lo, opts);

  const int n = opts.initial_panels;
  const double width = (hi - lo) / n;
  std::vector<Panel> panels(static_cast<std::size_t>(n));
  double f_left = f(lo);
  double estimate = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = lo + i * width;
    const double b = (i + 1 == n) ? hi : lo + (i + 1) * width;
    const double m = 0.5 * (a + b);
    const double f_mid = f(m);
    const double f_right = f(b);
    const double s = simpson(a, b, f_left, f_mid, f_right);
    panels[static_cast<std::size_t>(i)] = Panel{a, m, b, f_left, f_mid, f_right, s};
    estimate += s;
    f_left = f_right;
  }
  if (estimate == 0.0) return 0.0;

  const double tol = opts.rel_tol * std::abs(estimate) / n;
  double total = 0.0;
  for (const Panel& p : panels) total += refine(f, p, tol, 0, opts.max_depth);
  return total;
}

MaximizeResult golden_section_maximize(const std::function<double(double)>& f, double lo,
                                       double hi, double abs_tol, int max_iterations) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  int evals = 2;
  for (int it = 0; it < max_iterations && (hi - lo) > abs_tol; ++it) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
    ++evals;
  }
  const double x = 0.5 * (lo + hi);
  const double fx = f(x);
  ++evals;
  MaximizeResult best{x, fx, evals};
  if (fc > best.value) best = {c, fc, evals};
  if (fd > best.value) best = {d, fd, evals};
  return best;
}

}  // namespace chemo::numerics
