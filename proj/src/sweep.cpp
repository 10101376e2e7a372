#include <atomic>
#include <fstream>
#include <limits>
#include <set>
#include <thread>

#include "chemo/error.hpp"
#include "chemo/experiments.hpp"

namespace chemo {

using nlohmann::json;

namespace {

void set_path(json& doc, const std::string& path, const json& value) {
  json* node = &doc;
  std::size_t pos = 0;
  while (true) {
    const std::size_t dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (key.empty()) throw ValidationError("sweep: malformed axis path '" + path + "'");
    if (!node->is_object()) throw ValidationError("sweep: axis path '" + path + "' crosses a non-table value");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = json::object();
    pos = dot + 1;
  }
}

std::string leaf(const std::string& path) {
  const std::size_t dot = path.rfind('.');
  return dot == std::string::npos ? path : path.substr(dot + 1);
}

std::string value_text(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

struct Expanded {
  ExperimentConfig config;
  std::string parameters;
};

std::vector<Expanded> expand(const SweepSpec& spec) {
  std::size_t total = 1;
  for (const SweepAxis& axis : spec.axes) {
    if (axis.values.empty()) throw ValidationError("sweep: axis '" + axis.path + "' has no values");
    total *= axis.values.size();
    if (total > spec.cap) {
      throw ValidationError("sweep: cross product exceeds the cap of " + std::to_string(spec.cap) + " runs");
    }
  }
  const std::string base_label = spec.base.contains("label") && spec.base["label"].is_string()
                                     ? spec.base["label"].get<std::string>()
                                     : std::string("run");
  std::vector<Expanded> out;
  out.reserve(total);
  std::set<std::string> labels;
  std::vector<std::size_t> digit(spec.axes.size(), 0);
  for (std::size_t run = 0; run < total; ++run) {
    json doc = spec.base;
    std::string label = base_label;
    std::string params;
    for (std::size_t a = 0; a < spec.axes.size(); ++a) {
      const SweepAxis& axis = spec.axes[a];
      const json& v = axis.values[digit[a]];
      set_path(doc, axis.path, v);
      label += "__" + leaf(axis.path) + "=" + value_text(v);
      if (!params.empty()) params += ';';
      params += axis.path + "=" + value_text(v);
    }
    doc["label"] = label;
    doc.erase("output");
    if (!labels.insert(label).second) throw ValidationError("sweep: duplicate run label '" + label + "'");
    try {
      out.push_back({config_from_json(doc), params});
    } catch (const ValidationError& e) {
      throw ValidationError("sweep run '" + label + "': " + e.what());
    }
    // Last axis varies fastest.
    for (std::size_t a = spec.axes.size(); a-- > 0;) {
      if (++digit[a] < spec.axes[a].values.size()) break;
      digit[a] = 0;
    }
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::vector<ExperimentConfig> expand_sweep(const SweepSpec& spec) {
  std::vector<ExperimentConfig> out;
  for (Expanded& e : expand(spec)) out.push_back(std::move(e.config));
  return out;
}

std::string index_csv(const std::vector<SweepRow>& rows) {
  std::string out = "label,parameters,status,max_linf_u,min_v_margin,admissibility_margin,message\n";
  for (const SweepRow& r : rows) {
    out += csv_field(r.label) + ',' + csv_field(r.parameters) + ',' + r.status + ',' +
           format_double(r.max_linf_u) + ',' + format_double(r.min_v_margin) + ',' +
           format_double(r.admissibility_margin) + ',' + csv_field(r.message) + '\n';
  }
  return out;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const std::filesystem::path& out_dir) {
  const std::vector<Expanded> runs = expand(spec);
  std::filesystem::create_directories(out_dir);
  std::vector<SweepRow> rows(runs.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= runs.size()) return;
      SweepRow& row = rows[i];
      row.label = runs[i].config.label;
      row.parameters = runs[i].parameters;
      try {
        const ExperimentResult r = run_experiment(runs[i].config, out_dir / row.label);
        row.status = to_string(r.report.status);
        row.message = r.report.message;
        row.max_linf_u = r.summary.value("max_linf_u", 0.0);
        const json& mv = r.summary["min_v_margin"];
        row.min_v_margin = mv.is_number() ? mv.get<double>() : std::numeric_limits<double>::quiet_NaN();
        row.admissibility_margin = r.certificate.margin;
      } catch (const std::exception& e) {
        row.status = "error";
        row.message = e.what();
        row.max_linf_u = std::numeric_limits<double>::quiet_NaN();
        row.min_v_margin = std::numeric_limits<double>::quiet_NaN();
        row.admissibility_margin = std::numeric_limits<double>::quiet_NaN();
      }
    }
  };

  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(spec.parallelism), runs.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  std::ofstream out(out_dir / "index.csv", std::ios::binary);
  if (!out) throw Error("cannot write '" + (out_dir / "index.csv").string() + "'");
  out << index_csv(rows);
  return rows;
}

}  // namespace chemo
