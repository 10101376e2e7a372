#pragma once

// Closed forms for the chemotactic sensitivity bound chi(s) <= K (a+s)^-k and
// for the weight phi(s) = exp(g(s)), g(s) = -r int_eta^s (a+tau)^-k dtau, used
// in the energy  E = int u^p phi(v).

namespace chemo {

struct SensitivityParams {
  double K = 1.0;  // strength; K = 0 switches chemotaxis off
  double k = 1.0;  // decay exponent, k >= 1
  double a = 0.0;  // offset; a = 0 is the singular case

  // Throws ValidationError. K = 0 is accepted (no chemotaxis).
  void validate() const;
  bool singular() const { return a == 0.0; }
};

struct EnergyParams {
  double p = 2.0;
  double r = 1.0;
  double eps = 0.0;
  double eta = 1.0;  // lower bound of v; may be 0 only when a > 0

  void validate(const SensitivityParams& sp) const;
};

// K / (a+s)^k.  Throws DomainError when a + s <= 0.
double chi_upper(double s, const SensitivityParams& sp);

// g(s) and its first two derivatives, s >= eta.
double log_weight(double s, const EnergyParams& ep, const SensitivityParams& sp);
double log_weight_d1(double s, const EnergyParams& ep, const SensitivityParams& sp);
double log_weight_d2(double s, const EnergyParams& ep, const SensitivityParams& sp);

// phi(s) = exp(g(s)); equals 1 at s = eta and is nonincreasing.
double weight(double s, const EnergyParams& ep, const SensitivityParams& sp);

// inf_{s >= eta} phi(s): exp(-r / ((k-1)(a+eta)^(k-1))) for k > 1, and 0 for
// k = 1 where phi decays like (a+s)^-r.
double weight_infimum(const EnergyParams& ep, const SensitivityParams& sp);

// Coefficient of u^p |grad v|^2 after Young's inequality, for a given
// sensitivity value chi at s:
//   (-g'' - eps/(1-eps) p g' chi + p(p-1)/(4(1-eps)) chi^2
//    + (eps p + 1 - eps) g'^2 / ((1-eps)(p-1))) phi.
double gradient_coefficient(double s, const EnergyParams& ep,
                            const SensitivityParams& sp, double chi);

// H_eps(s): the bound on gradient_coefficient / phi obtained with chi at its
// upper bound. Energy estimates close when this is <= 0 on [eta, inf).
double gradient_coefficient_bound(double s, const EnergyParams& ep,
                                  const SensitivityParams& sp);

// The three terms of H_eps(s) grouped as a quadratic in r,
// H = r^2 quad + r lin + cst.
struct QuadraticInR {
  double quad;
  double lin;
  double cst;
  double operator()(double r) const { return (quad * r + lin) * r + cst; }
};
QuadraticInR gradient_coefficient_quadratic(double s, const EnergyParams& ep,
                                            const SensitivityParams& sp);

}  // namespace chemo
