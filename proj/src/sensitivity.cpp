#include "chemo/sensitivity.hpp"

#include <cmath>
#include <string>

#include "chemo/error.hpp"

namespace chemo {

namespace {

double shifted(double s, const SensitivityParams& sp) {
  const double base = sp.a + s;
  if (!(base > 0.0)) {
    throw DomainError("a + s must be positive (a = " + std::to_string(sp.a) +
                      ", s = " + std::to_string(s) + ")");
  }
  return base;
}

void require_on_weight_domain(double s, const EnergyParams& ep) {
  if (!(s >= ep.eta)) {
    throw DomainError("weight evaluated below eta (s = " + std::to_string(s) +
                      ", eta = " + std::to_string(ep.eta) + ")");
  }
}

void require_split(const EnergyParams& ep) {
  if (!(ep.eps >= 0.0 && ep.eps < 1.0)) throw DomainError("eps must lie in [0, 1)");
  if (!(ep.p > 1.0)) throw DomainError("p must exceed 1");
}

}  // namespace

void SensitivityParams::validate() const {
  if (!(K >= 0.0) || !std::isfinite(K)) {
    throw ValidationError("sensitivity: K must satisfy K > 0 (or K = 0 to disable chemotaxis), got " +
                          std::to_string(K));
  }
  if (!(k >= 1.0) || !std::isfinite(k)) {
    throw ValidationError("sensitivity: k must satisfy k >= 1, got " + std::to_string(k));
  }
  if (!(a >= 0.0) || !std::isfinite(a)) {
    throw ValidationError("sensitivity: a must satisfy a >= 0, got " + std::to_string(a));
  }
}

void EnergyParams::validate(const SensitivityParams& sp) const {
  if (!(p > 1.0)) throw ValidationError("energy: p must satisfy p > 1");
  if (!(r >= 0.0)) throw ValidationError("energy: r must satisfy r >= 0");
  if (!(eps >= 0.0 && eps < 1.0)) throw ValidationError("energy: eps must lie in [0, 1)");
  if (!(eta >= 0.0)) throw ValidationError("energy: eta must be nonnegative");
  if (!(sp.a + eta > 0.0)) throw ValidationError("energy: eta must be positive when a = 0");
}

double chi_upper(double s, const SensitivityParams& sp) {
  return sp.K / std::pow(shifted(s, sp), sp.k);
}

double log_weight(double s, const EnergyParams& ep, const SensitivityParams& sp) {
  require_on_weight_domain(s, ep);
  const double lo = std::log(shifted(ep.eta, sp));
  const double hi = std::log(shifted(s, sp));
  if (sp.k == 1.0) return -ep.r * (hi - lo);
  // (a+eta)^(1-k) - (a+s)^(1-k), written to stay accurate as k -> 1+.
  const double m = 1.0 - sp.k;
  const double diff = -std::exp(m * lo) * std::expm1(m * (hi - lo));
  return -ep.r / (sp.k - 1.0) * diff;
}

double log_weight_d1(double s, const EnergyParams& ep, const SensitivityParams& sp) {
  return -ep.r / std::pow(shifted(s, sp), sp.k);
}

double log_weight_d2(double s, const EnergyParams& ep, const SensitivityParams& sp) {
  return ep.r * sp.k / std::pow(shifted(s, sp), sp.k + 1.0);
}

double weight(double s, const EnergyParams& ep, const SensitivityParams& sp) {
  return std::exp(log_weight(s, ep, sp));
}

double weight_infimum(const EnergyParams& ep, const SensitivityParams& sp) {
  if (sp.k == 1.0) return ep.r == 0.0 ? 1.0 : 0.0;
  return std::exp(-ep.r / ((sp.k - 1.0) * std::pow(shifted(ep.eta, sp), sp.k - 1.0)));
}

double gradient_coefficient(double s, const EnergyParams& ep,
                            const SensitivityParams& sp, double chi) {
  require_split(ep);
  const double p = ep.p;
  const double eps = ep.eps;
  const double d1 = log_weight_d1(s, ep, sp);
  const double d2 = log_weight_d2(s, ep, sp);
  const double bracket = -d2 - eps / (1.0 - eps) * p * d1 * chi +
                         p * (p - 1.0) / (4.0 * (1.0 - eps)) * chi * chi +
                         (eps * p + 1.0 - eps) * d1 * d1 / ((1.0 - eps) * (p - 1.0));
  return bracket * weight(s, ep, sp);
}

QuadraticInR gradient_coefficient_quadratic(double s, const EnergyParams& ep,
                                            const SensitivityParams& sp) {
  require_split(ep);
  const double p = ep.p;
  const double eps = ep.eps;
  const double base = shifted(s, sp);
  const double inv2k = 1.0 / std::pow(base, 2.0 * sp.k);
  QuadraticInR q;
  q.quad = (eps * p + 1.0 - eps) / ((1.0 - eps) * (p - 1.0)) * inv2k;
  q.lin = eps * p * sp.K / (1.0 - eps) * inv2k - sp.k / std::pow(base, sp.k + 1.0);
  q.cst = p * (p - 1.0) * sp.K * sp.K / (4.0 * (1.0 - eps)) * inv2k;
  return q;
}

double gradient_coefficient_bound(double s, const EnergyParams& ep,
                                  const SensitivityParams& sp) {
  return gradient_coefficient_quadratic(s, ep, sp)(ep.r);
}

}  // namespace chemo
