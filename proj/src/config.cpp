#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <openssl/evp.h>
#include <toml.hpp>

#include "chemo/error.hpp"
#include "chemo/experiments.hpp"

namespace chemo {

using nlohmann::json;

std::string to_string(Preset p) {
  switch (p) {
    case Preset::Uniform: return "uniform";
    case Preset::GaussianBump: return "gaussian-bump";
    case Preset::TwoBumps: return "two-bumps";
    case Preset::Checker: return "checker";
  }
  return "uniform";
}

std::string to_string(Benchmark b) {
  return b == Benchmark::HeatEigenfunction ? "heat-eigenfunction" : "upwind-advection";
}

Grid GridSpec::make() const {
  return dim == 1 ? Grid::line(extents[0], cells[0])
                  : Grid::rectangle(extents[0], extents[1], cells[0], cells[1]);
}

namespace {

// Reads the members of one JSON object, remembering which keys were used so
// that leftovers can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ValidationError(where() + "expected a table/object");
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  template <class T>
  T get(const std::string& key, T fallback) {
    used_.insert(key);
    if (!obj_.contains(key)) return fallback;
    return convert<T>(obj_.at(key), key);
  }

  template <class T>
  T require(const std::string& key) {
    used_.insert(key);
    if (!obj_.contains(key)) throw ValidationError(where() + "missing required field '" + key + "'");
    return convert<T>(obj_.at(key), key);
  }

  const json* child(const std::string& key) {
    used_.insert(key);
    return obj_.contains(key) ? &obj_.at(key) : nullptr;
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!used_.count(key)) throw ValidationError("unknown key '" + field(key) + "'");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "" : "'" + path_ + "': "; }

  template <class T>
  T convert(const json& value, const std::string& key) const {
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!value.is_number()) throw ValidationError("");
      } else if constexpr (std::is_same_v<T, int>) {
        if (!value.is_number_integer()) throw ValidationError("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!value.is_string()) throw ValidationError("");
      }
      return value.get<T>();
    } catch (const std::exception&) {
      throw ValidationError("field '" + field(key) + "' has the wrong type (" +
                            std::string(value.type_name()) + ")");
    }
  }

  const json& obj_;
  std::string path_;
  std::set<std::string> used_;
};

void check(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

template <std::size_t N, class T>
std::array<T, N> read_axes(ObjectReader& r, const std::string& key, int dim, std::array<T, N> fallback) {
  const json* node = r.child(key);
  if (!node) return fallback;
  check(node->is_array() && static_cast<int>(node->size()) == dim,
        "field '" + r.field(key) + "' must be an array with one entry per dimension");
  std::array<T, N> out = fallback;
  for (int i = 0; i < dim; ++i) {
    const json& x = (*node)[static_cast<std::size_t>(i)];
    if constexpr (std::is_same_v<T, int>) {
      check(x.is_number_integer(), "field '" + r.field(key) + "' must hold integers");
    } else {
      check(x.is_number(), "field '" + r.field(key) + "' must hold numbers");
    }
    out[static_cast<std::size_t>(i)] = x.get<T>();
  }
  return out;
}

Preset parse_preset(const std::string& s) {
  if (s == "uniform") return Preset::Uniform;
  if (s == "gaussian-bump") return Preset::GaussianBump;
  if (s == "two-bumps") return Preset::TwoBumps;
  if (s == "checker") return Preset::Checker;
  throw ValidationError("initial.preset: unknown preset '" + s +
                        "' (expected uniform, gaussian-bump, two-bumps or checker)");
}

InitialSpec read_initial(const json& node, const GridSpec& grid) {
  ObjectReader r(node, "initial");
  InitialSpec s;
  s.preset = parse_preset(r.require<std::string>("preset"));
  const double lx = grid.extents[0];
  const double ly = grid.dim == 2 ? grid.extents[1] : 0.0;
  switch (s.preset) {
    case Preset::Uniform:
      s.u_value = r.get("u_value", s.u_value);
      s.v_value = r.get("v_value", s.v_value);
      break;
    case Preset::GaussianBump:
    case Preset::TwoBumps:
      s.mass = r.get("mass", s.mass);
      s.width = r.get("width", 0.1 * lx);
      s.background = r.get("background", s.background);
      s.v_floor = r.get("v_floor", s.v_floor);
      s.v_bump = r.get("v_bump", s.v_bump);
      if (s.preset == Preset::GaussianBump) {
        s.center = read_axes<2, double>(r, "center", grid.dim, {0.5 * lx, 0.5 * ly});
      } else {
        s.centers = {{{0.3 * lx, 0.3 * ly}, {0.7 * lx, 0.7 * ly}}};
        if (const json* c = r.child("centers")) {
          check(c->is_array() && c->size() == 2, "field 'initial.centers' must list two points");
          for (std::size_t b = 0; b < 2; ++b) {
            const json& pt = (*c)[b];
            check(pt.is_array() && static_cast<int>(pt.size()) == grid.dim,
                  "field 'initial.centers' entries need one coordinate per dimension");
            for (int i = 0; i < grid.dim; ++i) {
              check(pt[static_cast<std::size_t>(i)].is_number(), "field 'initial.centers' must hold numbers");
              s.centers[b][static_cast<std::size_t>(i)] = pt[static_cast<std::size_t>(i)].get<double>();
            }
          }
        }
      }
      break;
    case Preset::Checker:
      s.u_low = r.get("u_low", s.u_low);
      s.u_high = r.get("u_high", s.u_high);
      s.squares = r.get("squares", s.squares);
      s.v_floor = r.get("v_floor", s.v_floor);
      break;
  }
  r.finish();
  return s;
}

void validate_initial(const InitialSpec& s, const GridSpec& grid, const SensitivityParams& sp) {
  const bool needs_positive_v = sp.a == 0.0 && sp.K > 0.0;
  auto inside = [&](const std::array<double, 2>& p) {
    for (int i = 0; i < grid.dim; ++i) {
      if (p[static_cast<std::size_t>(i)] < 0.0 || p[static_cast<std::size_t>(i)] > grid.extents[static_cast<std::size_t>(i)]) return false;
    }
    return true;
  };
  switch (s.preset) {
    case Preset::Uniform:
      check(s.u_value > 0.0, "initial.u_value must be positive (u0 may not vanish identically)");
      check(s.v_value >= 0.0, "initial.v_value must be nonnegative");
      check(!needs_positive_v || s.v_value > 0.0, "initial.v_value must be positive when a = 0");
      break;
    case Preset::GaussianBump:
    case Preset::TwoBumps:
      check(s.mass > 0.0, "initial.mass must be positive");
      check(s.width > 0.0, "initial.width must be positive");
      check(s.background >= 0.0, "initial.background must be nonnegative");
      check(s.v_floor >= 0.0 && s.v_bump >= 0.0, "initial.v_floor and initial.v_bump must be nonnegative");
      check(s.v_floor > 0.0 || s.v_bump > 0.0, "initial: v0 may not vanish identically");
      check(!needs_positive_v || s.v_floor > 0.0,
            "initial.v_floor must be positive when a = 0 (v0 must be strictly positive)");
      if (s.preset == Preset::GaussianBump) {
        check(inside(s.center), "initial.center must lie inside the domain");
      } else {
        check(inside(s.centers[0]) && inside(s.centers[1]), "initial.centers must lie inside the domain");
      }
      break;
    case Preset::Checker:
      check(s.u_low >= 0.0 && s.u_high >= s.u_low && s.u_high > 0.0,
            "initial: checker requires 0 <= u_low <= u_high and u_high > 0");
      check(s.squares >= 1, "initial.squares must be >= 1");
      check(s.v_floor >= 0.0, "initial.v_floor must be nonnegative");
      check(s.v_floor > 0.0, needs_positive_v ? "initial.v_floor must be positive when a = 0 (v0 must be strictly positive)"
                                              : "initial: v0 may not vanish identically");
      break;
  }
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  ObjectReader root(j, "");
  ExperimentConfig c;
  c.label = root.get<std::string>("label", c.label);
  check(!c.label.empty(), "label must not be empty");
  check(c.label.find_first_of("/\\") == std::string::npos && c.label != "." && c.label != "..",
        "label must be usable as a directory name");

  {
    const json* node = root.child("sensitivity");
    check(node != nullptr, "missing required table 'sensitivity'");
    ObjectReader r(*node, "sensitivity");
    c.sp.K = r.require<double>("K");
    c.sp.k = r.get("k", 1.0);
    c.sp.a = r.get("a", 0.0);
    r.finish();
    c.sp.validate();
  }

  if (const json* node = root.child("grid")) {
    ObjectReader r(*node, "grid");
    c.grid.dim = r.get("dim", 2);
    check(c.grid.dim == 1 || c.grid.dim == 2, "grid.dim must be 1 or 2");
    if (c.grid.dim == 1) c.grid.cells = {64, 1};
    c.grid.extents = read_axes<2, double>(r, "extents", c.grid.dim, {1.0, 1.0});
    c.grid.cells = read_axes<2, int>(r, "cells", c.grid.dim, c.grid.cells);
    r.finish();
  }
  if (c.grid.dim == 1) {
    c.grid.extents[1] = 1.0;
    c.grid.cells[1] = 1;
  }
  c.grid.make();

  c.n_effective = root.get("n_effective", c.grid.dim);
  check(c.n_effective >= 1, "n_effective must be >= 1");

  {
    const json* node = root.child("initial");
    check(node != nullptr, "missing required table 'initial'");
    c.initial = read_initial(*node, c.grid);
    validate_initial(c.initial, c.grid, c.sp);
  }

  c.horizon = root.get("horizon", c.horizon);
  check(c.horizon > 0.0, "horizon must be positive");
  c.cadence = root.get("cadence", c.cadence);
  check(c.cadence >= 1, "cadence must be >= 1");

  c.solver.sp = c.sp;
  if (const json* node = root.child("solver")) {
    ObjectReader r(*node, "solver");
    SolverConfig& s = c.solver;
    s.cfl_diff = r.get("cfl_diff", s.cfl_diff);
    s.cfl_adv = r.get("cfl_adv", s.cfl_adv);
    s.dt_max = r.get("dt_max", s.dt_max);
    s.dt_min = r.get("dt_min", s.dt_min);
    const std::string flux = r.get<std::string>("flux_scheme", to_string(s.flux_scheme));
    check(flux == "upwind" || flux == "central", "solver.flux_scheme must be upwind or central");
    s.flux_scheme = flux == "upwind" ? FluxScheme::Upwind : FluxScheme::Central;
    const std::string vstep = r.get<std::string>("v_stepping", "implicit-euler");
    check(vstep == "implicit-euler", "solver.v_stepping must be implicit-euler");
    const std::string udiff = r.get<std::string>("u_diffusion", to_string(s.u_diffusion));
    check(udiff == "implicit-euler" || udiff == "explicit",
          "solver.u_diffusion must be implicit-euler or explicit");
    s.u_diffusion = udiff == "explicit" ? DiffusionStepping::Explicit : DiffusionStepping::ImplicitEuler;
    s.cg_tol = r.get("cg_tol", s.cg_tol);
    s.cg_max_iter = r.get("cg_max_iter", s.cg_max_iter);
    s.blow_up_factor = r.get("blow_up_factor", s.blow_up_factor);
    s.grad_threshold = r.get("grad_threshold", s.grad_threshold);
    r.finish();
  }
  c.solver.validate();
  check(c.solver.dt_min < c.horizon, "solver.dt_min must be smaller than the horizon");

  if (const json* node = root.child("eta")) {
    ObjectReader r(*node, "eta");
    c.eta.mode = r.get<std::string>("mode", c.eta.mode);
    check(c.eta.mode == "convex" || c.eta.mode == "general", "eta.mode must be convex or general");
    c.eta.c0 = r.get("c0", c.eta.c0);
    r.finish();
    check(c.eta.mode != "general" || c.eta.c0 > 0.0, "eta.c0 must be positive in general mode");
  }

  if (const json* node = root.child("energy")) {
    ObjectReader r(*node, "energy");
    c.c_tol = r.get("c_tol", c.c_tol);
    r.finish();
    check(c.c_tol > 0.0, "energy.c_tol must be positive");
  }

  c.output = root.get<std::string>("output", "out/" + c.label);

  if (const json* node = root.child("convergence")) {
    ObjectReader r(*node, "convergence");
    ConvergenceSpec& cv = c.convergence;
    const std::string b = r.get<std::string>("benchmark", to_string(cv.benchmark));
    check(b == "heat-eigenfunction" || b == "upwind-advection",
          "convergence.benchmark must be heat-eigenfunction or upwind-advection");
    cv.benchmark = b == "heat-eigenfunction" ? Benchmark::HeatEigenfunction : Benchmark::UpwindAdvection;
    cv.levels = r.get("levels", cv.levels);
    cv.dt = r.get("dt", cv.dt);
    cv.amplitude = r.get("amplitude", cv.amplitude);
    cv.cfl = r.get("cfl", cv.cfl);
    cv.v_amplitude = r.get("v_amplitude", cv.v_amplitude);
    r.finish();
    check(cv.levels >= 1, "convergence.levels must be >= 1");
    check(cv.dt > 0.0, "convergence.dt must be positive");
    check(cv.cfl > 0.0 && cv.cfl <= 1.0, "convergence.cfl must lie in (0, 1]");
  }

  root.finish();
  return c;
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["label"] = c.label;
  j["sensitivity"] = {{"K", c.sp.K}, {"k", c.sp.k}, {"a", c.sp.a}};
  j["n_effective"] = c.n_effective;
  json grid = {{"dim", c.grid.dim}};
  grid["extents"] = json::array();
  grid["cells"] = json::array();
  for (int i = 0; i < c.grid.dim; ++i) {
    grid["extents"].push_back(c.grid.extents[static_cast<std::size_t>(i)]);
    grid["cells"].push_back(c.grid.cells[static_cast<std::size_t>(i)]);
  }
  j["grid"] = grid;

  const InitialSpec& s = c.initial;
  json init = {{"preset", to_string(s.preset)}};
  auto point = [&](const std::array<double, 2>& p) {
    json a = json::array();
    for (int i = 0; i < c.grid.dim; ++i) a.push_back(p[static_cast<std::size_t>(i)]);
    return a;
  };
  switch (s.preset) {
    case Preset::Uniform:
      init["u_value"] = s.u_value;
      init["v_value"] = s.v_value;
      break;
    case Preset::GaussianBump:
    case Preset::TwoBumps:
      init["mass"] = s.mass;
      init["width"] = s.width;
      init["background"] = s.background;
      init["v_floor"] = s.v_floor;
      init["v_bump"] = s.v_bump;
      if (s.preset == Preset::GaussianBump) {
        init["center"] = point(s.center);
      } else {
        init["centers"] = json::array({point(s.centers[0]), point(s.centers[1])});
      }
      break;
    case Preset::Checker:
      init["u_low"] = s.u_low;
      init["u_high"] = s.u_high;
      init["squares"] = s.squares;
      init["v_floor"] = s.v_floor;
      break;
  }
  j["initial"] = init;
  j["horizon"] = c.horizon;
  j["cadence"] = c.cadence;
  const SolverConfig& sv = c.solver;
  j["solver"] = {{"cfl_diff", sv.cfl_diff},
                 {"cfl_adv", sv.cfl_adv},
                 {"dt_max", sv.dt_max},
                 {"dt_min", sv.dt_min},
                 {"flux_scheme", to_string(sv.flux_scheme)},
                 {"v_stepping", "implicit-euler"},
                 {"u_diffusion", to_string(sv.u_diffusion)},
                 {"cg_tol", sv.cg_tol},
                 {"cg_max_iter", sv.cg_max_iter},
                 {"blow_up_factor", sv.blow_up_factor},
                 {"grad_threshold", sv.grad_threshold}};
  j["eta"] = {{"mode", c.eta.mode}, {"c0", c.eta.c0}};
  j["energy"] = {{"c_tol", c.c_tol}};
  j["output"] = c.output;
  const ConvergenceSpec& cv = c.convergence;
  j["convergence"] = {{"benchmark", to_string(cv.benchmark)}, {"levels", cv.levels},
                      {"dt", cv.dt},   {"amplitude", cv.amplitude},
                      {"cfl", cv.cfl}, {"v_amplitude", cv.v_amplitude}};
  return j;
}

namespace {

json toml_node_to_json(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    json obj = json::object();
    for (const auto& [key, value] : *t) obj[std::string(key.str())] = toml_node_to_json(value);
    return obj;
  }
  if (const auto* a = node.as_array()) {
    json arr = json::array();
    for (const auto& value : *a) arr.push_back(toml_node_to_json(value));
    return arr;
  }
  if (const auto* v = node.as_integer()) return json(v->get());
  if (const auto* v = node.as_floating_point()) return json(v->get());
  if (const auto* v = node.as_boolean()) return json(v->get());
  if (const auto* v = node.as_string()) return json(v->get());
  std::ostringstream os;
  if (const auto* v = node.as_date()) os << v->get();
  if (const auto* v = node.as_time()) os << v->get();
  if (const auto* v = node.as_date_time()) os << v->get();
  return json(os.str());
}

}  // namespace

json toml_to_json(std::string_view text) {
  try {
    const toml::table table = toml::parse(text);
    return toml_node_to_json(table);
  } catch (const toml::parse_error& e) {
    const auto& where = e.source().begin;
    throw ValidationError("TOML parse error at line " + std::to_string(where.line) + ", column " +
                          std::to_string(where.column) + ": " + std::string(e.description()));
  }
}

namespace {

json parse_document(std::string_view text, ConfigFormat format) {
  if (format == ConfigFormat::Toml) return toml_to_json(text);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("JSON parse error: ") + e.what());
  }
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, ConfigFormat format) {
  return config_from_json(parse_document(text, format));
}

namespace {

std::pair<std::string, ConfigFormat> read_document(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string ext = path.extension().string();
  ConfigFormat format;
  if (ext == ".json") {
    format = ConfigFormat::Json;
  } else if (ext == ".toml") {
    format = ConfigFormat::Toml;
  } else {
    throw ValidationError("config '" + path.string() + "' must have a .json or .toml extension");
  }
  return {buf.str(), format};
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path) {
  const auto [text, format] = read_document(path);
  return parse_config(text, format);
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error("sha256: digest failed");
  }
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

std::string config_hash(const ExperimentConfig& c) { return sha256_hex(to_json(c).dump()); }

SweepSpec parse_sweep(std::string_view text, ConfigFormat format) {
  const json doc = parse_document(text, format);
  ObjectReader r(doc, "");
  SweepSpec spec;
  const json* base = r.child("base");
  check(base != nullptr && base->is_object(), "sweep: missing required table 'base'");
  spec.base = *base;
  if (const json* axes = r.child("axes")) {
    check(axes->is_array(), "sweep: 'axes' must be an array");
    for (const json& a : *axes) {
      ObjectReader ar(a, "axes[]");
      SweepAxis axis;
      axis.path = ar.require<std::string>("path");
      const json* values = ar.child("values");
      check(values != nullptr && values->is_array() && !values->empty(),
            "sweep: axis '" + axis.path + "' needs a nonempty 'values' array");
      axis.values.assign(values->begin(), values->end());
      ar.finish();
      spec.axes.push_back(std::move(axis));
    }
  }
  spec.parallelism = r.get("parallelism", spec.parallelism);
  check(spec.parallelism >= 1, "sweep: parallelism must be >= 1");
  spec.cap = static_cast<std::size_t>(r.get("cap", static_cast<int>(spec.cap)));
  r.finish();
  return spec;
}

SweepSpec load_sweep(const std::filesystem::path& path) {
  const auto [text, format] = read_document(path);
  return parse_sweep(text, format);
}

}  // namespace chemo
