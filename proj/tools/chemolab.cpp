#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "chemo/error.hpp"
#include "chemo/experiments.hpp"

using namespace chemo;
using nlohmann::json;

namespace {

struct EtaArgs {
  std::optional<double> eta;
  std::optional<double> v0_min;
  std::optional<double> mass;
  std::optional<double> diam;
  std::optional<double> c0;
  int n = 2;
};

void add_eta_options(CLI::App* cmd, EtaArgs& e, bool allow_direct) {
  cmd->add_option("--n", e.n, "space dimension")->check(CLI::PositiveNumber);
  if (allow_direct) cmd->add_option("--eta", e.eta, "lower bound for v, used as given");
  cmd->add_option("--v0-min", e.v0_min, "minimum of v0");
  cmd->add_option("--mass", e.mass, "mass of u0");
  cmd->add_option("--diam", e.diam, "diameter of a convex domain");
  cmd->add_option("--c0", e.c0, "lower bound of the fundamental solution (general domains)");
}

EtaEstimate resolve_eta(const EtaArgs& e) {
  if (e.eta) {
    if (e.v0_min || e.mass || e.diam || e.c0) {
      throw ValidationError("--eta cannot be combined with --v0-min/--mass/--diam/--c0");
    }
    EtaEstimate est;
    est.eta = *e.eta;
    est.n = e.n;
    return est;
  }
  if (!e.v0_min || !e.mass) throw ValidationError("give --eta, or --v0-min and --mass");
  if (e.diam.has_value() == e.c0.has_value()) throw ValidationError("give exactly one of --diam or --c0");
  const EtaDomain domain = e.diam ? EtaDomain{ConvexDomain{e.n, *e.diam}} : EtaDomain{GeneralDomain{*e.c0}};
  return compute_eta(*e.v0_min, *e.mass, domain);
}

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chemotaxis lab: admissibility checks, simulations, sweeps and convergence studies"};
  app.require_subcommand(1);

  SensitivityParams sp;
  EtaArgs check_eta;
  auto* check = app.add_subcommand("check", "certify sensitivity parameters for boundedness");
  check->add_option("--K", sp.K, "sensitivity amplitude")->required();
  check->add_option("--k", sp.k, "decay exponent (>= 1)");
  check->add_option("--a", sp.a, "shift (>= 0)");
  add_eta_options(check, check_eta, true);

  EtaArgs eta_args;
  auto* eta = app.add_subcommand("eta", "lower bound for the signal");
  add_eta_options(eta, eta_args, false);

  std::string config_path;
  std::string out_dir;
  std::optional<int> cadence;
  std::string format = "json";
  auto* simulate = app.add_subcommand("simulate", "run one experiment");
  simulate->add_option("config", config_path, "experiment file (.json or .toml)")->required();
  simulate->add_option("--out", out_dir, "output directory (default: the config's output)");
  simulate->add_option("--cadence", cadence, "steps between samples")->check(CLI::PositiveNumber);
  simulate->add_option("--format", format, "stdout format")->check(CLI::IsMember({"json", "csv"}));

  std::string sweep_path;
  std::optional<int> threads;
  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep");
  sweep->add_option("spec", sweep_path, "sweep file (.json or .toml)")->required();
  sweep->add_option("--out", out_dir, "output directory")->required();
  sweep->add_option("--threads", threads, "concurrent runs")->check(CLI::PositiveNumber);

  std::optional<int> levels;
  auto* converge = app.add_subcommand("converge", "grid-convergence study");
  converge->add_option("config", config_path, "experiment file (.json or .toml)")->required();
  converge->add_option("--levels", levels, "number of grid levels (>= 3)");
  converge->add_option("--out", out_dir, "write order.json into this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*check) {
      sp.validate();
      check_eta.n = std::max(check_eta.n, 1);
      const EtaEstimate est = resolve_eta(check_eta);
      print_json(to_json(certify(sp, check_eta.n, est)));
      return 0;
    }
    if (*eta) {
      print_json(to_json(resolve_eta(eta_args)));
      return 0;
    }
    if (*simulate) {
      ExperimentConfig cfg = load_config(config_path);
      if (cadence) cfg.cadence = *cadence;
      const std::filesystem::path dir = out_dir.empty() ? std::filesystem::path(cfg.output) : std::filesystem::path(out_dir);
      const ExperimentResult r = run_experiment(cfg, dir);
      if (format == "csv") {
        std::cout << monitor_csv(r.report.samples);
      } else {
        print_json(r.summary);
      }
      if (r.report.status != RunStatus::Completed) std::cerr << "chemolab: " << r.report.message << "\n";
      return exit_code(r);
    }
    if (*sweep) {
      SweepSpec spec = load_sweep(sweep_path);
      if (threads) spec.parallelism = *threads;
      const std::vector<SweepRow> rows = run_sweep(spec, out_dir);
      std::cout << index_csv(rows);
      return 0;
    }
    if (*converge) {
      const ExperimentConfig cfg = load_config(config_path);
      const OrderReport rep = convergence_study(cfg, levels.value_or(cfg.convergence.levels));
      const json j = to_json(rep);
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream(std::filesystem::path(out_dir) / "order.json") << j.dump(2) << "\n";
      }
      print_json(j);
      return 0;
    }
  } catch (const ValidationError& e) {
    std::cerr << "chemolab: invalid input: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "chemolab: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
