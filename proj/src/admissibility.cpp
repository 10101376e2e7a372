#include "chemo/admissibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "chemo/error.hpp"
#include "chemo/numerics.hpp"

namespace chemo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

// Finite-valued x (n + 2) / (n - 2 x), +inf once the denominator vanishes.
double growth_bound(double x, int n) {
  const double den = n - 2.0 * x;
  return den > 0.0 ? x * (n + 2.0) / den : kInf;
}

}  // namespace

std::string to_string(EtaMode mode) {
  return mode == EtaMode::ConvexExplicit ? "convex-explicit" : "general-c0";
}

double heat_kernel_tail(double tau, int n, double diam) {
  if (!(diam > 0.0)) throw ValidationError("heat_kernel_tail: diam must be positive");
  if (n < 1) throw ValidationError("heat_kernel_tail: n must be >= 1");
  if (!(tau > 0.0)) return 0.0;
  const double d2 = diam * diam;
  const double half_n = 0.5 * n;
  auto integrand = [=](double s) {
    if (s <= 0.0) return 0.0;
    return std::exp(-(s + d2 / (4.0 * s)) - half_n * std::log(4.0 * kPi * s));
  };
  return numerics::integrate(integrand, 0.0, tau, numerics::QuadratureOptions{1e-8, 40, 64});
}

EtaEstimate compute_eta(double v0_min, double u0_mass, const EtaDomain& domain,
                        const EtaSearchOptions& opts) {
  if (!(v0_min > 0.0)) {
    throw ValidationError("compute_eta: min v0 must be positive, got " + fmt(v0_min));
  }
  if (!(u0_mass > 0.0)) {
    throw ValidationError("compute_eta: mass of u0 must be positive, got " + fmt(u0_mass));
  }

  EtaEstimate est;
  est.v0_min = v0_min;
  est.u0_mass = u0_mass;

  std::function<double(double)> first;
  std::function<double(double)> second;
  if (const auto* convex = std::get_if<ConvexDomain>(&domain)) {
    if (!(convex->diam > 0.0)) throw ValidationError("compute_eta: diam must be positive");
    est.mode = EtaMode::ConvexExplicit;
    est.diam = convex->diam;
    est.n = convex->n;
    const int n = convex->n;
    const double diam = convex->diam;
    first = [=](double tau) { return std::exp(-tau) * v0_min; };
    second = [=](double tau) { return u0_mass * heat_kernel_tail(tau, n, diam); };
  } else {
    const double c0 = std::get<GeneralDomain>(domain).c0;
    if (!(c0 > 0.0)) throw ValidationError("compute_eta: c0 must be positive");
    est.mode = EtaMode::GeneralC0;
    est.c0 = c0;
    first = [=](double tau) { return std::exp(-2.0 * tau) * v0_min; };
    second = [=](double tau) { return c0 * u0_mass * -std::expm1(-tau); };
  }

  // first decreases to 0 and second increases from 0, so the crossing lies in
  // the first doubling interval where second overtakes first.
  double hi = 1.0;
  int doublings = 0;
  while (first(hi) > second(hi)) {
    hi *= 2.0;
    if (++doublings > 60) throw NumericalError("compute_eta: no crossing of the branches found");
  }
  const double lo = doublings == 0 ? 0.0 : 0.5 * hi;
  auto lower_envelope = [&](double tau) { return std::min(first(tau), second(tau)); };
  const auto best = numerics::golden_section_maximize(lower_envelope, lo, hi, opts.tau_tol);
  est.tau_star = best.x;
  est.eta = best.value;
  return est;
}

double threshold_K(double k, double a, double eta, int n) {
  return k * std::pow(a + eta, k - 1.0) * std::sqrt(2.0 / n);
}

double select_bound(double p, double eps, const SensitivityParams& sp, double eta) {
  return (1.0 - eps) * sp.k * std::pow(sp.a + eta, sp.k - 1.0) /
         (eps * p + std::sqrt(p * (eps * p + 1.0 - eps)));
}

PEpsSelection select_p_eps(const SensitivityParams& sp, int n, double eta) {
  if (!(sp.k > 1.0)) throw ValidationError("select_p_eps: requires k > 1");
  if (!(sp.K < threshold_K(sp.k, sp.a, eta, n))) {
    throw ValidationError("select_p_eps: requires K below the threshold");
  }
  const double half_n = 0.5 * n;
  for (int i = 0; i <= 52; ++i) {
    const double p = half_n + std::ldexp(1.0, -i);
    if (!(p > half_n) || !(p > 1.0)) break;
    for (int j = 1; j <= 60; ++j) {
      const double eps = std::ldexp(1.0, -j);
      const double slack = select_bound(p, eps, sp, eta) - sp.K;
      if (slack > 0.0) return {p, eps, slack};
    }
  }
  throw NumericalError("select_p_eps: no admissible (p, eps) on the search grid; K is too close "
                       "to the threshold for the grid resolution");
}

double r0(double p, double eps, double K) {
  return 0.5 * (p - 1.0) * K * std::sqrt(p / (eps * p + 1.0 - eps));
}

double discriminant_Dr(double s, double p, double eps, const SensitivityParams& sp) {
  const double base = sp.a + s;
  const double shift = eps * p * sp.K / (1.0 - eps) - sp.k * std::pow(base, sp.k - 1.0);
  const double bracket =
      shift * shift - p * (eps * p + 1.0 - eps) * sp.K * sp.K / ((1.0 - eps) * (1.0 - eps));
  return bracket / std::pow(base, 4.0 * sp.k);
}

std::pair<double, double> interval_Ip(double p, double K) {
  if (!(p > 1.0)) throw ValidationError("interval_Ip: requires p > 1");
  const double disc = 1.0 - p * K * K;
  if (disc < 0.0) {
    throw ValidationError("interval_Ip: empty interval, p = " + fmt(p) + " exceeds 1/K^2 = " +
                          fmt(1.0 / (K * K)));
  }
  const double root = std::sqrt(disc);
  const double half = 0.5 * (p - 1.0);
  return {half * (1.0 - root), half * (1.0 + root)};
}

bool smoothing_admissible(double theta, double mu, int n) {
  if (!(theta >= 1.0) || !(mu >= 1.0)) {
    throw ValidationError("smoothing_admissible: exponents must be >= 1");
  }
  return 0.5 * n * (1.0 / theta - 1.0 / mu) < 1.0;
}

double gn_exponent(double p, int n) {
  const double num = 2.0 * n / p - 0.5 * n;
  const double den = num + 1.0;
  if (std::abs(den) < 1e-300) throw DomainError("gn_exponent: vanishing denominator");
  return num / den;
}

std::string check_rung(const LadderRung& rung, const LadderRung* previous, int n, double K) {
  std::ostringstream why;
  const double p = rung.p;
  const double r = rung.r;
  const double q = rung.q;
  if (!(p > r)) why << "p <= r; ";
  if (!(r < 0.5 * n)) why << "r >= n/2; ";
  if (!(p * K * K < 1.0)) {
    why << "p >= 1/K^2; ";
  } else {
    const auto [lo, hi] = interval_Ip(p, K);
    if (!(r > lo && r < hi)) why << "r outside I_p; ";
  }
  if (!(p < n + 1.0)) why << "p >= n + 1; ";
  if (!(p - r >= 1.0)) why << "p - r < 1; ";
  const double q_lo = 2.0 * p / (p + 1.0);
  const double q_hi = std::min(p, n - 2.0 * r > 0.0 ? n * (p - r) / (n - 2.0 * r) : kInf);
  if (!(q > q_lo && q < q_hi)) why << "q outside its window; ";
  if (previous == nullptr) {
    if (!(p > 1.0) || !(p < growth_bound(1.0, n))) why << "p0 outside (1, (n+2)/(n-2)); ";
    if (!smoothing_admissible(1.0, p - r, n)) why << "L^1 -> L^(p-r) smoothing fails; ";
  } else {
    if (!(p > previous->p)) why << "p not increasing; ";
    if (!(p < growth_bound(previous->p, n))) why << "p exceeds f(previous p); ";
    if (!smoothing_admissible(previous->q, p - r, n)) {
      why << "L^q(prev) -> L^(p-r) smoothing fails; ";
    }
  }
  return why.str();
}

Ladder build_ladder(int n, double K, const LadderOptions& opts) {
  if (n < 2) throw ValidationError("build_ladder: requires n >= 2");
  if (!(K > 0.0)) throw ValidationError("build_ladder: requires K > 0");
  if (!(K < std::sqrt(2.0 / n))) throw ValidationError("build_ladder: requires K < sqrt(2/n)");
  const double frac = opts.fraction;
  const double inv_K2 = 1.0 / (K * K);
  const double half_n = 0.5 * n;

  Ladder ladder;
  double p = 1.0 + frac * (std::min({inv_K2, n + 1.0, growth_bound(1.0, n)}) - 1.0);
  for (int i = 0; i < opts.max_rungs; ++i) {
    const double r = 0.5 * (p - 1.0);
    const double q_lo = 2.0 * p / (p + 1.0);
    const double q_hi = std::min(p, n - 2.0 * r > 0.0 ? n * (p - r) / (n - 2.0 * r) : kInf);
    if (!(q_hi > q_lo)) throw NumericalError("build_ladder: empty q window at rung " + std::to_string(i));
    const LadderRung rung{p, r, q_lo + frac * (q_hi - q_lo)};
    const LadderRung* previous = ladder.rungs.empty() ? nullptr : &ladder.rungs.back();
    if (const std::string why = check_rung(rung, previous, n, K); !why.empty()) {
      throw NumericalError("build_ladder: rung " + std::to_string(i) + " fails recheck: " + why);
    }
    ladder.rungs.push_back(rung);
    if (rung.p > half_n && rung.q > half_n) {
      ladder.terminal_p = rung.p;
      return ladder;
    }

    // Next p: below 1/K^2, n + 1 and f(p), and small enough that the current q
    // still smooths into L^(p' - r').
    double upper = std::min({inv_K2, n + 1.0, growth_bound(p, n)});
    if (2.0 * rung.q < n) upper = std::min(upper, 2.0 * n * rung.q / (n - 2.0 * rung.q) - 1.0);
    if (!(upper > p)) throw NumericalError("build_ladder: empty p window after rung " + std::to_string(i));
    p += frac * (upper - p);
  }
  throw NumericalError("build_ladder: no termination within " + std::to_string(opts.max_rungs) +
                       " rungs");
}

std::vector<double> verification_samples(double eta, int count) {
  std::vector<double> s;
  if (count < 2) count = 2;
  s.reserve(static_cast<std::size_t>(count) + 1);
  double lo = eta;
  if (!(eta > 0.0)) {
    s.push_back(0.0);
    lo = 1e-12;
  }
  const double hi = eta * 1e6 + 1e6;
  const double log_lo = std::log(lo);
  const double step = (std::log(hi) - log_lo) / (count - 1);
  for (int i = 0; i < count; ++i) {
    s.push_back(i == 0 ? lo : (i + 1 == count ? hi : std::exp(log_lo + step * i)));
  }
  return s;
}

double energy_constant(const EnergyParams& ep, const SensitivityParams& sp) {
  if (sp.k == 1.0) return ep.r;
  auto ratio = [&](double s) { return s / std::pow(sp.a + s, sp.k); };
  const double peak = sp.a / (sp.k - 1.0);
  return ep.r * (peak > ep.eta ? ratio(peak) : ratio(ep.eta));
}

std::optional<EnergyParams> AdmissibilityCertificate::energy_params() const {
  if (trivial) return EnergyParams{std::max(2.0, 0.5 * n + 1.0), 0.0, 0.0, eta.eta};
  if (const auto* sel = std::get_if<KGreaterSelection>(&selection)) {
    return EnergyParams{sel->p, sel->r0, sel->eps, eta.eta};
  }
  if (const auto* sel = std::get_if<KOneSelection>(&selection)) {
    return EnergyParams{sel->p, sel->r, 0.0, eta.eta};
  }
  return std::nullopt;
}

namespace {

// Sum of |term| over the four terms of H_eps at s.
double local_scale(double s, const EnergyParams& ep, const SensitivityParams& sp) {
  const auto q = gradient_coefficient_quadratic(s, ep, sp);
  const double cross = sp.k / std::pow(sp.a + s, sp.k + 1.0);
  const double lin_k = q.lin + cross;
  return std::abs(q.quad) * ep.r * ep.r + std::abs(lin_k) * ep.r + cross * ep.r + std::abs(q.cst);
}

void verify_samples(AdmissibilityCertificate& cert, const EnergyParams& ep,
                    const CertifyOptions& opts) {
  double worst = -kInf;
  const auto samples = verification_samples(cert.eta.eta, opts.samples);
  for (double s : samples) {
    const double h = gradient_coefficient_bound(s, ep, cert.sp);
    const double scale = local_scale(s, ep, cert.sp);
    worst = std::max(worst, scale > 0.0 ? h / scale : h);
  }
  cert.verified_s_samples = static_cast<int>(samples.size());
  cert.max_scaled_H = worst;
}

}  // namespace

AdmissibilityCertificate certify(const SensitivityParams& sp, int n, const EtaEstimate& eta,
                                 const CertifyOptions& opts) {
  sp.validate();
  if (n < 1) throw ValidationError("certify: n must be >= 1");
  AdmissibilityCertificate cert;
  cert.sp = sp;
  cert.n = n;
  cert.eta = eta;
  cert.k_branch = sp.k == 1.0 ? KBranch::KEqualsOne : KBranch::KGreaterThanOne;
  cert.threshold = threshold_K(sp.k, sp.a, eta.eta, n);
  cert.margin = cert.threshold - sp.K;

  if (sp.K == 0.0) {
    cert.trivial = true;
    cert.note = "trivially admissible (K=0)";
    return cert;
  }
  if (!cert.admissible()) {
    cert.note = "not admissible: K >= threshold";
    return cert;
  }

  if (cert.k_branch == KBranch::KGreaterThanOne) {
    const auto pe = select_p_eps(sp, n, eta.eta);
    KGreaterSelection sel{pe.p, pe.eps, r0(pe.p, pe.eps, sp.K), 0.0};
    const EnergyParams ep{sel.p, sel.r0, sel.eps, eta.eta};
    // H (a+s)^2k = C - k r (a+s)^(k-1): nonpositive exactly beyond the crossover.
    const double p = sel.p;
    const double e = sel.eps;
    const double r = sel.r0;
    const double C = (e * p + 1.0 - e) / ((1.0 - e) * (p - 1.0)) * r * r +
                     e * p * sp.K / (1.0 - e) * r + p * (p - 1.0) * sp.K * sp.K / (4.0 * (1.0 - e));
    sel.crossover = std::pow(C / (sp.k * r), 1.0 / (sp.k - 1.0)) - sp.a;
    cert.selection = sel;
    verify_samples(cert, ep, opts);
    if (sel.crossover > eta.eta) {
      cert.verified = false;
      cert.note = "crossover above eta; ";
    }
  } else {
    const double lo = std::max(1.0, 0.5 * n);
    // n + 1 keeps u^p representable for small K.
    const double hi = std::min(1.0 / (sp.K * sp.K), n + 1.0);
    if (!(hi > lo)) {
      cert.verified = false;
      cert.note = "no exponent p in (max(1, n/2), 1/K^2)";
      return cert;
    }
    KOneSelection sel;
    sel.p = 0.5 * (lo + hi);
    sel.I_p = interval_Ip(sel.p, sp.K);
    sel.r = 0.5 * (sel.I_p.first + sel.I_p.second);
    if (n >= 2) {
      sel.ladder = build_ladder(n, sp.K);
    } else {
      sel.ladder.terminal_p = sel.p;
      cert.note = "outside theorem scope (n < 2): no ladder; ";
    }
    const EnergyParams ep{sel.p, sel.r, 0.0, eta.eta};
    cert.selection = sel;
    verify_samples(cert, ep, opts);
  }
  if (cert.max_scaled_H > opts.tolerance) {
    cert.verified = false;
    cert.note += "H_eps verification failed";
  }
  return cert;
}

}  // namespace chemo
