#pragma once

// Experiment configuration, initial-data presets, persisted runs, parameter
// sweeps and grid-convergence studies.

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "chemo/admissibility.hpp"
#include "chemo/grid.hpp"
#include "chemo/solver.hpp"

namespace chemo {

struct GridSpec {
  int dim = 2;
  std::array<double, 2> extents{1.0, 1.0};
  std::array<int, 2> cells{64, 64};

  Grid make() const;
};

enum class Preset { Uniform, GaussianBump, TwoBumps, Checker };
std::string to_string(Preset p);

struct InitialSpec {
  Preset preset = Preset::Uniform;
  // uniform
  double u_value = 1.0;
  double v_value = 1.0;
  // bumps: u0 is renormalized to `mass`
  double mass = 1.0;
  std::array<double, 2> center{0.5, 0.5};
  std::array<std::array<double, 2>, 2> centers{{{0.3, 0.3}, {0.7, 0.7}}};
  double width = 0.1;
  double background = 0.0;  // added to the bump shape before renormalization
  double v_floor = 1.0;     // v0 = v_floor + v_bump * shape
  double v_bump = 0.0;
  // checker
  double u_low = 0.5;
  double u_high = 1.5;
  int squares = 4;
};

enum class Benchmark { HeatEigenfunction, UpwindAdvection };
std::string to_string(Benchmark b);

struct ConvergenceSpec {
  Benchmark benchmark = Benchmark::HeatEigenfunction;
  int levels = 4;
  double dt = 1e-3;        // heat: fixed across levels
  double amplitude = 0.5;  // of the cosine mode in u0
  double cfl = 0.5;        // advection: dt = cfl h / max|w|
  double v_amplitude = 0.5;  // advection: frozen v = v_floor + v_amplitude cos(pi x / L)
};

struct EtaSpec {
  std::string mode = "convex";  // "convex" or "general"
  double c0 = 0.0;
};

struct ExperimentConfig {
  std::string label = "run";
  SensitivityParams sp;
  int n_effective = 2;
  GridSpec grid;
  InitialSpec initial;
  double horizon = 1.0;
  int cadence = 10;
  SolverConfig solver;
  EtaSpec eta;
  double c_tol = 10.0;
  std::string output;
  ConvergenceSpec convergence;
};

enum class ConfigFormat { Json, Toml };

// Parses, applies defaults and validates. Unknown keys are errors. Throws
// ValidationError naming the offending field or the parse position.
ExperimentConfig parse_config(std::string_view text, ConfigFormat format);
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);
// Converts a TOML document to the equivalent JSON tree.
nlohmann::json toml_to_json(std::string_view text);

// SHA-256 hex digest of the canonical (fully resolved, key-sorted, compact)
// JSON form of the configuration.
std::string config_hash(const ExperimentConfig& c);
std::string sha256_hex(std::string_view data);

// Initial fields for a preset. Throws ValidationError when v0 would vanish
// somewhere with a = 0, or u0 would be negative or identically zero.
std::pair<Field, Field> initial_data(const InitialSpec& spec, const Grid& grid,
                                     const SensitivityParams& sp);

nlohmann::json to_json(const EtaEstimate& e);
nlohmann::json to_json(const AdmissibilityCertificate& c);

// Columns t, mass, min_v, linf_u, lp_u, energy, residual, dt; shortest
// round-trip decimals.
std::string monitor_csv(const std::vector<MonitorSample>& samples);
std::string format_double(double x);

struct ResidualSummary {
  std::size_t interior = 0;
  std::size_t within = 0;
  double fraction_within = 1.0;
  double p99_positive = 0.0;  // 99th percentile of max(residual, 0)
  double max_residual = 0.0;
};
ResidualSummary summarize_residuals(const std::vector<ResidualPoint>& pts);

struct ExperimentResult {
  EtaEstimate eta;
  bool eta_available = true;
  AdmissibilityCertificate certificate;
  RunReport report;
  std::vector<ResidualPoint> residuals;
  nlohmann::json summary;
  double wall_seconds = 0.0;
};

// certify -> compute_eta -> run, then residuals. Writes certificate.json,
// monitors.csv, summary.json and timing.json into `out_dir` when given.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::optional<std::filesystem::path>& out_dir = std::nullopt);

// Exit code for a finished experiment: 0 completed, 3 blow-up suspected,
// 2 runtime error.
int exit_code(const ExperimentResult& r);

struct SweepAxis {
  std::string path;  // dotted, e.g. "sensitivity.K"
  std::vector<nlohmann::json> values;
};

struct SweepSpec {
  nlohmann::json base;
  std::vector<SweepAxis> axes;
  int parallelism = 1;
  std::size_t cap = 4096;
};

SweepSpec parse_sweep(std::string_view text, ConfigFormat format);
SweepSpec load_sweep(const std::filesystem::path& path);

// Expanded, validated configurations (labels unique) in cross-product order.
std::vector<ExperimentConfig> expand_sweep(const SweepSpec& spec);

struct SweepRow {
  std::string label;
  std::string parameters;
  std::string status;
  double max_linf_u = 0.0;
  double min_v_margin = 0.0;
  double admissibility_margin = 0.0;
  std::string message;
};

// Runs the cross product with up to `parallelism` concurrent runs into
// out_dir/<label>/ and writes out_dir/index.csv. Failed runs keep their row.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, const std::filesystem::path& out_dir);
std::string index_csv(const std::vector<SweepRow>& rows);

struct ConvergenceLevel {
  int cells = 0;  // along x
  double h = 0.0;
  double dt = 0.0;
  std::optional<double> error_vs_exact;
  std::optional<double> diff_to_next;  // L2 distance to the restricted finer solution
};

struct OrderReport {
  Benchmark benchmark;
  std::vector<ConvergenceLevel> levels;
  std::vector<double> orders;          // log2 ratios of successive differences
  std::vector<double> exact_orders;    // log2 ratios of errors vs exact, when available
  double observed_order = 0.0;         // finest Richardson ratio
  bool monotone = true;
};

// `levels` successive h-halvings of config.grid (the coarsest level).
// Throws ValidationError for fewer than three levels.
OrderReport convergence_study(const ExperimentConfig& config, int levels);
nlohmann::json to_json(const OrderReport& r);

}  // namespace chemo
