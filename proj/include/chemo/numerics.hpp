#pragma once

#include <functional>

namespace chemo::numerics {

struct QuadratureOptions {
  double rel_tol = 1e-8;
  int max_depth = 40;
  int initial_panels = 64;
};

// Adaptive Simpson quadrature of f over [lo, hi]. The absolute target is
// rel_tol times a composite-Simpson estimate on initial_panels panels,
// apportioned by width. Throws NumericalError when a panel needs more than
// max_depth bisections.
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 const QuadratureOptions& opts = {});

struct MaximizeResult {
  double x;
  double value;
  int evaluations;
};

// Golden-section search for the maximum of a unimodal f on [lo, hi]; stops
// once the bracket is narrower than abs_tol.
MaximizeResult golden_section_maximize(const std::function<double(double)>& f, double lo,
                                       double hi, double abs_tol = 1e-10,
                                       int max_iterations = 500);

}  // namespace chemo::numerics
