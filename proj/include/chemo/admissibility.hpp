#pragma once

// Lower bound eta for the signal, the smallness condition on K, and explicit
// parameter selections (p, eps, r) that make H_eps <= 0 on [eta, inf).

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "chemo/sensitivity.hpp"

namespace chemo {

enum class EtaMode { ConvexExplicit, GeneralC0 };

std::string to_string(EtaMode mode);

struct EtaEstimate {
  double eta = 0.0;
  EtaMode mode = EtaMode::GeneralC0;
  double tau_star = 0.0;  // maximizing tau
  std::optional<double> c0;
  std::optional<double> diam;
  int n = 2;
  double v0_min = 0.0;
  double u0_mass = 0.0;
};

// Convex domains use the Neumann heat kernel bound with the domain diameter;
// otherwise a user-supplied lower bound c0 of the fundamental solution of
// w_t = Delta w - w.
struct ConvexDomain {
  int n;
  double diam;
};
struct GeneralDomain {
  double c0;
};
using EtaDomain = std::variant<ConvexDomain, GeneralDomain>;

struct EtaSearchOptions {
  double tau_tol = 1e-10;
};

// int_0^tau (4 pi s)^(-n/2) exp(-(s + diam^2 / (4 s))) ds.
double heat_kernel_tail(double tau, int n, double diam);

// sup_{tau > 0} min{first(tau), second(tau)} where first decreases from v0_min
// and second increases from 0. Throws ValidationError for v0_min <= 0.
EtaEstimate compute_eta(double v0_min, double u0_mass, const EtaDomain& domain,
                        const EtaSearchOptions& opts = {});

// k (a+eta)^(k-1) sqrt(2/n): the strict upper bound for K.
double threshold_K(double k, double a, double eta, int n);

// Right-hand side of K < (1-eps) k (a+eta)^(k-1) / (eps p + sqrt(p (eps p + 1 - eps))).
double select_bound(double p, double eps, const SensitivityParams& sp, double eta);

struct PEpsSelection {
  double p;
  double eps;
  double slack;  // select_bound - K > 0
};

// Deterministic grid search for k > 1. p = n/2 + 2^-i (i = 0, 1, ...), and for
// each p, eps = 2^-j (j = 1, 2, ...); the first strictly admissible pair in
// that order is returned. Throws NumericalError when both grids are exhausted.
PEpsSelection select_p_eps(const SensitivityParams& sp, int n, double eta);

// Double root of H_eps at its tightest point:
// (p-1) K / 2 * sqrt(p / (eps p + 1 - eps)).
double r0(double p, double eps, double K);

// a2(s)^2 - 4 a1(s) a3(s) for H_eps = a1 r^2 + a2 r + a3.
double discriminant_Dr(double s, double p, double eps, const SensitivityParams& sp);

// Interval of weights r with H_0 <= 0 in the k = 1 case. Degenerate when
// p K^2 = 1; throws ValidationError when p K^2 > 1 or p <= 1.
std::pair<double, double> interval_Ip(double p, double K);

// (n/2)(1/theta - 1/mu) < 1; either exponent may be +infinity.
bool smoothing_admissible(double theta, double mu, int n);

// (2n/p - n/2) / (2n/p + 1 - n/2).
double gn_exponent(double p, int n);

struct LadderRung {
  double p;
  double r;
  double q;
};

struct Ladder {
  std::vector<LadderRung> rungs;
  double terminal_p;
};

struct LadderOptions {
  double fraction = 0.9;  // position inside each open window
  int max_rungs = 64;
};

// Exponent bootstrap for k = 1 and K < sqrt(2/n). Every rung is rechecked;
// a failed check or an empty window throws NumericalError.
Ladder build_ladder(int n, double K, const LadderOptions& opts = {});

// Recheck of one rung against its predecessor (nullptr for the first rung).
// Returns an empty string when every constraint holds.
std::string check_rung(const LadderRung& rung, const LadderRung* previous, int n, double K);

enum class KBranch { KEqualsOne, KGreaterThanOne };

struct KGreaterSelection {
  double p;
  double eps;
  double r0;
  double crossover;  // H_eps <= 0 exactly for s >= crossover
};

struct KOneSelection {
  double p;
  double r;
  std::pair<double, double> I_p;
  Ladder ladder;
};

struct AdmissibilityCertificate {
  SensitivityParams sp;
  int n = 2;
  EtaEstimate eta;
  double threshold = 0.0;
  double margin = 0.0;
  KBranch k_branch = KBranch::KEqualsOne;
  std::variant<std::monostate, KGreaterSelection, KOneSelection> selection;
  int verified_s_samples = 0;
  double max_scaled_H = 0.0;  // max over samples of H / local scale
  bool trivial = false;       // K = 0
  bool verified = true;       // samples and crossover agree with H_eps <= 0
  std::string note;

  bool admissible() const { return margin > 0.0 && verified; }
  // Energy exponents implied by the selection (r = 0 when trivial).
  std::optional<EnergyParams> energy_params() const;
};

struct CertifyOptions {
  int samples = 10000;
  double tolerance = 1e-12;  // relative to the local scale sum |terms|
};

// Hypothesis bundle for boundedness. Never throws for K >= threshold; the
// certificate then carries margin <= 0 and no selection.
AdmissibilityCertificate certify(const SensitivityParams& sp, int n, const EtaEstimate& eta,
                                 const CertifyOptions& opts = {});

// Log-spaced verification points s in [eta, eta 1e6 + 1e6].
std::vector<double> verification_samples(double eta, int count);

// r sup_{s >= eta} s / (a+s)^k: the constant c of the energy inequality.
double energy_constant(const EnergyParams& ep, const SensitivityParams& sp);

}  // namespace chemo
