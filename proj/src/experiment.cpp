#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include "chemo/diagnostics.hpp"
#include "chemo/error.hpp"
#include "chemo/experiments.hpp"

namespace chemo {

using nlohmann::json;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string monitor_csv(const std::vector<MonitorSample>& samples) {
  std::string out = "t,mass,min_v,linf_u,lp_u,energy,residual,dt\n";
  for (const MonitorSample& s : samples) {
    for (double x : {s.t, s.mass, s.min_v, s.linf_u, s.lp_u, s.energy, s.residual}) {
      out += format_double(x);
      out += ',';
    }
    out += format_double(s.dt);
    out += '\n';
  }
  return out;
}

namespace {

// JSON has no NaN or infinity; those become null.
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string scope_label(const AdmissibilityCertificate& c) {
  if (c.n < 2) return "outside theorem scope (the boundedness result requires n >= 2)";
  if (c.trivial) return "no chemotaxis (K = 0)";
  if (!(c.margin > 0.0)) return "exploratory: outside the boundedness hypotheses (K >= threshold)";
  if (!c.verified) return "hypotheses not verified";
  return c.k_branch == KBranch::KEqualsOne ? "bounded: k = 1 smallness condition"
                                           : "bounded: k > 1 smallness condition";
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace

json to_json(const EtaEstimate& e) {
  json j = {{"eta", e.eta},       {"mode", to_string(e.mode)}, {"tau_star", e.tau_star},
            {"n", e.n},           {"v0_min", e.v0_min},        {"u0_mass", e.u0_mass}};
  j["c0"] = e.c0 ? json(*e.c0) : json(nullptr);
  j["diam"] = e.diam ? json(*e.diam) : json(nullptr);
  return j;
}

json to_json(const AdmissibilityCertificate& c) {
  json j;
  j["K"] = c.sp.K;
  j["k"] = c.sp.k;
  j["a"] = c.sp.a;
  j["n"] = c.n;
  j["eta"] = c.eta.eta;
  j["eta_estimate"] = to_json(c.eta);
  j["threshold"] = number(c.threshold);
  j["margin"] = number(c.margin);
  j["admissible"] = c.admissible();
  j["branch"] = c.k_branch == KBranch::KEqualsOne ? "k=1" : "k>1";
  j["trivial"] = c.trivial;
  j["verified"] = c.verified;
  j["verified_s_samples"] = c.verified_s_samples;
  j["max_scaled_H"] = number(c.max_scaled_H);
  j["scope"] = scope_label(c);
  j["note"] = c.note;
  j["p"] = nullptr;
  j["eps"] = nullptr;
  j["r0"] = nullptr;
  j["I_p"] = nullptr;
  j["ladder"] = json::array();
  if (const auto* s = std::get_if<KGreaterSelection>(&c.selection)) {
    j["p"] = s->p;
    j["eps"] = s->eps;
    j["r0"] = s->r0;
    j["crossover"] = number(s->crossover);
  } else if (const auto* s = std::get_if<KOneSelection>(&c.selection)) {
    j["p"] = s->p;
    j["eps"] = 0.0;
    j["r0"] = s->r;
    j["I_p"] = json::array({s->I_p.first, s->I_p.second});
    for (const LadderRung& r : s->ladder.rungs) j["ladder"].push_back({{"p", r.p}, {"r", r.r}, {"q", number(r.q)}});
    if (!s->ladder.rungs.empty()) j["ladder_terminal_p"] = s->ladder.terminal_p;
  }
  if (const auto ep = c.energy_params()) {
    j["energy"] = {{"p", ep->p}, {"r", ep->r}, {"eps", ep->eps}, {"eta", ep->eta}};
  }
  return j;
}

ResidualSummary summarize_residuals(const std::vector<ResidualPoint>& pts) {
  ResidualSummary s;
  s.interior = pts.size();
  if (pts.empty()) return s;
  std::vector<double> positive;
  positive.reserve(pts.size());
  s.max_residual = -std::numeric_limits<double>::infinity();
  for (const ResidualPoint& p : pts) {
    if (p.within()) ++s.within;
    positive.push_back(std::max(p.residual, 0.0));
    s.max_residual = std::max(s.max_residual, p.residual);
  }
  s.fraction_within = static_cast<double>(s.within) / static_cast<double>(s.interior);
  std::sort(positive.begin(), positive.end());
  // Nearest-rank percentile.
  const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(positive.size())));
  s.p99_positive = positive[std::max<std::size_t>(rank, 1) - 1];
  return s;
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::optional<std::filesystem::path>& out_dir) {
  const auto started = std::chrono::steady_clock::now();
  ExperimentResult result;
  const Grid grid = config.grid.make();
  auto [u0, v0] = initial_data(config.initial, grid, config.sp);

  const int n = config.n_effective;
  const double v0_min = min_field(v0);
  const double u0_mass = mass(u0, grid);
  if (v0_min > 0.0) {
    const EtaDomain domain = config.eta.mode == "general" ? EtaDomain{GeneralDomain{config.eta.c0}}
                                                          : EtaDomain{ConvexDomain{n, grid.diameter()}};
    result.eta = compute_eta(v0_min, u0_mass, domain);
  } else {
    // No positive lower bound is available from v0; eta = 0 is the
    // conservative choice and only arises with a > 0 or K = 0.
    result.eta_available = false;
    result.eta.eta = 0.0;
    result.eta.mode = config.eta.mode == "general" ? EtaMode::GeneralC0 : EtaMode::ConvexExplicit;
    result.eta.n = n;
    result.eta.v0_min = v0_min;
    result.eta.u0_mass = u0_mass;
  }

  result.certificate = certify(config.sp, n, result.eta);
  std::optional<EnergyParams> energy;
  if (result.certificate.admissible()) energy = result.certificate.energy_params();

  SolverConfig solver = config.solver;
  solver.sp = config.sp;
  RunOptions opts;
  opts.horizon = config.horizon;
  opts.cadence = config.cadence;
  opts.sample = SampleSpec{config.sp, energy};
  result.report = run(SimState::make(grid, std::move(u0), std::move(v0)), solver, opts);

  std::vector<MonitorSample>& samples = result.report.samples;
  if (energy) {
    const double c_const = energy_constant(*energy, config.sp);
    // Residuals are evaluated on maximal runs of samples with a finite energy.
    std::size_t start = 0;
    while (start < samples.size()) {
      if (!std::isfinite(samples[start].energy)) {
        ++start;
        continue;
      }
      std::size_t end = start;
      while (end < samples.size() && std::isfinite(samples[end].energy)) ++end;
      if (end - start >= 3) {
        const std::span<const MonitorSample> window(samples.data() + start, end - start);
        for (ResidualPoint p : energy_residual(window, *energy, c_const, grid.max_spacing(), config.c_tol)) {
          p.index += start;
          samples[p.index].residual = p.residual;
          result.residuals.push_back(p);
        }
      }
      start = end;
    }
  }
  const ResidualSummary rs = summarize_residuals(result.residuals);

  double min_v = std::numeric_limits<double>::infinity();
  double max_linf = 0.0;
  double max_mass_drift = 0.0;
  for (const MonitorSample& s : samples) {
    min_v = std::min(min_v, s.min_v);
    max_linf = std::max(max_linf, s.linf_u);
    max_mass_drift = std::max(max_mass_drift, std::abs(s.mass - u0_mass) / u0_mass);
  }

  json& sum = result.summary;
  sum["label"] = config.label;
  sum["config_hash"] = config_hash(config);
  sum["status"] = to_string(result.report.status);
  sum["message"] = result.report.message;
  sum["scope"] = scope_label(result.certificate);
  sum["certificate"] = result.certificate.note.empty()
                           ? (result.certificate.admissible() ? "admissible" : "not admissible")
                           : result.certificate.note;
  sum["admissible"] = result.certificate.admissible();
  sum["admissibility_margin"] = number(result.certificate.margin);
  sum["eta"] = result.eta.eta;
  sum["eta_available"] = result.eta_available;
  sum["steps"] = result.report.steps;
  sum["cg_iterations"] = result.report.cg_iterations;
  sum["final_time"] = result.report.final_time;
  sum["threads"] = result.report.threads;
  sum["initial_mass"] = u0_mass;
  sum["max_relative_mass_drift"] = max_mass_drift;
  sum["max_mass_projection"] = result.report.max_mass_projection;
  sum["min_v"] = number(min_v);
  sum["min_v_margin"] = number(min_v - result.eta.eta);
  sum["max_linf_u"] = max_linf;
  sum["samples"] = samples.size();
  if (energy) {
    sum["energy"] = {{"p", energy->p}, {"r", energy->r}, {"eps", energy->eps},
                     {"c", energy_constant(*energy, config.sp)}, {"c_tol", config.c_tol}};
  } else {
    sum["energy"] = nullptr;
  }
  sum["residual"] = {{"interior_samples", rs.interior},
                     {"within_tolerance", rs.within},
                     {"fraction_within", rs.fraction_within},
                     {"p99_positive", rs.p99_positive},
                     {"max", number(rs.max_residual)}};

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    json cert = to_json(result.certificate);
    cert["eta_available"] = result.eta_available;
    write_file(*out_dir / "config.json", to_json(config).dump(2) + "\n");
    write_file(*out_dir / "certificate.json", cert.dump(2) + "\n");
    write_file(*out_dir / "monitors.csv", monitor_csv(samples));
    write_file(*out_dir / "summary.json", sum.dump(2) + "\n");
    write_file(*out_dir / "timing.json",
               json{{"wall_seconds", result.wall_seconds}, {"threads", result.report.threads}}.dump(2) + "\n");
  }
  return result;
}

int exit_code(const ExperimentResult& r) {
  switch (r.report.status) {
    case RunStatus::Completed: return 0;
    case RunStatus::BlowUpSuspected: return 3;
    case RunStatus::Error: return 2;
  }
  return 2;
}

}  // namespace chemo
