#include "ergo/cli/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "ergo/core/errors.hpp"
#include "ergo/entropy/sample_cloud.hpp"
#include "ergo/models/registry.hpp"
#include "ergo/thermo/thermo.hpp"

namespace ergo::cli {

namespace {

std::vector<int> range(int lo, int hi) {
  std::vector<int> out;
  for (int n = lo; n <= hi; ++n) out.push_back(n);
  return out;
}

bool is_modular(const std::string& system) { return system == "modular-geodesic"; }

}  // namespace

// Defaults table. Flat models (identity, doubling, cat) read entropy at r = 0.05;
// the geodesic flow at r = 0.3 (Brin-Katok, Gibbs) and 0.2 (Riemannian-local)
// with the cusp window y <= 8.
//
//   key                      flat            cat             modular-geodesic
//   methods                  all three       all three       brin-katok, riemannian-local
//   cloud_size               100000          100000          1000000 (periodic-orbit: 2000)
//   katok.r_list / delta     [0.05] / 0.1    [0.05] / 0.1    [0.3] / 0.1
//   katok.n_list             1..12           1..10           1..8
//   brin_katok.r_list        [0.05]          [0.05]          [0.3]
//   brin_katok.n_list        1..12           1..10           1..8
//   brin_katok.panel_size    20              20              20
//   riemannian.r_list        [0.05]          [0.05]          [0.2]
//   riemannian.n_list        1..12           1..10           1..10
//   riemannian.n_samples     400000          400000          100000
//   riemannian.window_y_max  none            none            8
//   lyapunov.steps           10000           10000           10000
//   gibbs.r / T_list         0.1 / 0..10     0.1 / 0..10     0.3 / 0..10
//   gibbs.mode               both            both            both
//   gibbs.window_y_max       none            none            2
//   gibbs.base_vectors       10              10              10
//   gibbs.n_samples          1000000         1000000         1000000
//   gibbs.log_c_max          log 20          log 20          log 20
//   report.ruelle_tol        0.1             0.1             0.1
//   report.pesin_tol         0.1             0.1             0.15
ExperimentConfig default_config(const std::string& system, const std::string& measure) {
  ExperimentConfig c;
  c.system = system;
  c.measure = measure;
  c.output_dir = "out";
  const bool modular = is_modular(system);
  const int n_top = modular ? 8 : (system == "cat" ? 10 : 12);
  // Katok balls at r = 0.3 wrap around the quotient, so it is opt-in there.
  c.methods = modular ? std::vector<std::string>{"brin-katok", "riemannian-local"} : method_names();
  c.cloud_size = modular ? (measure == "periodic-orbit" ? 2000 : 1000000) : 100000;

  c.katok = {{modular ? 0.3 : 0.05}, range(1, n_top), 0.1};
  c.brin_katok = {{modular ? 0.3 : 0.05}, range(1, n_top), 20};
  c.riemannian.r_list = {modular ? 0.2 : 0.05};
  c.riemannian.n_list = range(1, modular ? 10 : n_top);
  c.riemannian.n_samples = modular ? 100000 : 400000;
  c.riemannian.panel_size = 20;
  if (modular) c.riemannian.window_y_max = 8.0;

  c.lyapunov.steps = 10000;

  c.gibbs.r = modular ? 0.3 : 0.1;
  c.gibbs.T_list = range(0, 10);
  c.gibbs.mode = "both";
  if (modular) c.gibbs.window_y_max = 2.0;
  c.gibbs.base_vectors = 10;
  c.gibbs.n_samples = 1000000;
  c.gibbs.log_c_max = 2.995732273553991;  // log 20

  c.report.ruelle_tol = 0.1;
  c.report.pesin_tol = default_pesin_tolerance(system);
  return c;
}

namespace {

std::string where(const std::string& source, const YAML::Node& node) {
  const auto mark = node.Mark();
  if (mark.line < 0) return source;
  return source + ":" + std::to_string(mark.line + 1);
}

[[noreturn]] void fail(const std::string& source, const YAML::Node& node, const std::string& msg) {
  throw ConfigError(where(source, node) + ": " + msg);
}

template <typename T>
T scalar(const std::string& source, const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) fail(source, node, key + " must be a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(source, node, "invalid value '" + node.Scalar() + "' for " + key);
  }
}

template <typename T>
std::vector<T> list(const std::string& source, const YAML::Node& node, const std::string& key) {
  if (!node.IsSequence()) fail(source, node, key + " must be a list");
  std::vector<T> out;
  for (const auto& item : node) out.push_back(scalar<T>(source, item, key));
  return out;
}

// n_list: [..] or n_range: [lo, hi]
std::optional<std::vector<int>> int_list(const std::string& source, const YAML::Node& map,
                                         const std::string& list_key, const std::string& range_key) {
  if (map[list_key] && map[range_key]) {
    fail(source, map[range_key], "give either " + list_key + " or " + range_key);
  }
  if (map[list_key]) return list<int>(source, map[list_key], list_key);
  if (map[range_key]) {
    const auto lohi = list<int>(source, map[range_key], range_key);
    if (lohi.size() != 2 || lohi[0] > lohi[1]) fail(source, map[range_key], range_key + " must be [lo, hi]");
    return range(lohi[0], lohi[1]);
  }
  return std::nullopt;
}

void check_keys(const std::string& source, const YAML::Node& map, const std::set<std::string>& allowed,
                const std::string& section) {
  if (!map.IsMap()) fail(source, map, section + " must be a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(source, kv.first, "unknown key '" + key + "' in " + section);
  }
}

void check_r_list(const std::string& source, const YAML::Node& node, const std::vector<double>& r) {
  if (r.empty()) fail(source, node, "r_list is empty");
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r[i] > 0.0)) fail(source, node, "r_list must be positive");
    if (i > 0 && !(r[i] < r[i - 1])) fail(source, node, "r_list must be descending");
  }
}

void check_n_list(const std::string& source, const YAML::Node& node, const std::vector<int>& n,
                  int min_value, std::size_t min_size, const std::string& key) {
  if (n.size() < min_size) fail(source, node, key + " needs at least " + std::to_string(min_size) + " entries");
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] < min_value) fail(source, node, key + " entries must be >= " + std::to_string(min_value));
    if (i > 0 && !(n[i] > n[i - 1])) fail(source, node, key + " must be ascending");
  }
}

template <typename Block>
void read_grid(const std::string& source, const YAML::Node& map, Block& block) {
  if (map["r_list"]) {
    block.r_list = list<double>(source, map["r_list"], "r_list");
    check_r_list(source, map["r_list"], block.r_list);
  }
  if (auto n = int_list(source, map, "n_list", "n_range")) {
    check_n_list(source, map[map["n_list"] ? "n_list" : "n_range"], *n, 1, 2, "n_list");
    block.n_list = *n;
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) throw ConfigError(source + ": config must be a mapping");
  check_keys(source, root,
             {"system", "measure", "seed", "cloud_size", "output", "stages", "methods", "lyapunov", "katok",
              "brin_katok", "riemannian", "gibbs", "report"},
             "config");

  if (!root["system"]) throw ConfigError(source + ": missing required key 'system'");
  const auto system = scalar<std::string>(source, root["system"], "system");
  const auto ids = system_ids();
  if (std::find(ids.begin(), ids.end(), system) == ids.end()) {
    fail(source, root["system"], "unknown system '" + system + "'");
  }
  std::string measure = is_modular(system) ? "liouville" : "lebesgue";
  if (root["measure"]) measure = scalar<std::string>(source, root["measure"], "measure");

  ExperimentConfig c = default_config(system, measure);
  if (!root["seed"]) throw ConfigError(source + ": missing required key 'seed'");
  c.seed = scalar<std::uint64_t>(source, root["seed"], "seed");
  if (root["cloud_size"]) {
    c.cloud_size = scalar<long>(source, root["cloud_size"], "cloud_size");
    if (c.cloud_size < 1000) fail(source, root["cloud_size"], "cloud_size must be >= 1000");
  }
  if (root["output"]) c.output_dir = scalar<std::string>(source, root["output"], "output");
  if (root["stages"]) {
    c.stages = list<std::string>(source, root["stages"], "stages");
    for (const auto& s : c.stages) {
      const auto& names = stage_names();
      if (std::find(names.begin(), names.end(), s) == names.end()) {
        fail(source, root["stages"], "unknown stage '" + s + "'");
      }
    }
  }

  if (root["methods"]) {
    c.methods = list<std::string>(source, root["methods"], "methods");
    for (const auto& m : c.methods) {
      const auto& names = method_names();
      if (std::find(names.begin(), names.end(), m) == names.end()) {
        fail(source, root["methods"], "unknown method '" + m + "'");
      }
    }
    if (c.methods.empty()) fail(source, root["methods"], "methods is empty");
  }

  if (const auto n = root["lyapunov"]) {
    check_keys(source, n, {"steps"}, "lyapunov");
    if (n["steps"]) {
      c.lyapunov.steps = scalar<long>(source, n["steps"], "steps");
      if (c.lyapunov.steps < 100) fail(source, n["steps"], "steps must be >= 100");
    }
  }
  if (const auto n = root["katok"]) {
    check_keys(source, n, {"r_list", "n_list", "n_range", "delta"}, "katok");
    read_grid(source, n, c.katok);
    if (n["delta"]) {
      c.katok.delta = scalar<double>(source, n["delta"], "delta");
      if (!(c.katok.delta > 0.0 && c.katok.delta < 1.0)) fail(source, n["delta"], "delta must lie in (0, 1)");
    }
  }
  if (const auto n = root["brin_katok"]) {
    check_keys(source, n, {"r_list", "n_list", "n_range", "panel_size"}, "brin_katok");
    read_grid(source, n, c.brin_katok);
    if (n["panel_size"]) {
      c.brin_katok.panel_size = scalar<int>(source, n["panel_size"], "panel_size");
      if (c.brin_katok.panel_size < 1) fail(source, n["panel_size"], "panel_size must be >= 1");
    }
  }
  if (const auto n = root["riemannian"]) {
    check_keys(source, n, {"r_list", "n_list", "n_range", "n_samples", "panel_size", "window_y_max"},
               "riemannian");
    read_grid(source, n, c.riemannian);
    if (n["n_samples"]) {
      c.riemannian.n_samples = scalar<long>(source, n["n_samples"], "n_samples");
      if (c.riemannian.n_samples < 1000) fail(source, n["n_samples"], "n_samples must be >= 1000");
    }
    if (n["panel_size"]) {
      c.riemannian.panel_size = scalar<int>(source, n["panel_size"], "panel_size");
      if (c.riemannian.panel_size < 1) fail(source, n["panel_size"], "panel_size must be >= 1");
    }
    if (n["window_y_max"]) {
      if (n["window_y_max"].IsNull()) {
        c.riemannian.window_y_max.reset();
      } else {
        c.riemannian.window_y_max = scalar<double>(source, n["window_y_max"], "window_y_max");
        if (!(*c.riemannian.window_y_max > 1.0)) fail(source, n["window_y_max"], "window_y_max must be > 1");
      }
    }
  }
  if (const auto n = root["gibbs"]) {
    check_keys(source, n,
               {"r", "T_list", "T_range", "mode", "window_y_max", "base_vectors", "n_samples", "log_c_max"},
               "gibbs");
    if (n["r"]) {
      c.gibbs.r = scalar<double>(source, n["r"], "r");
      if (!(c.gibbs.r > 0.0)) fail(source, n["r"], "r must be positive");
    }
    if (auto T = int_list(source, n, "T_list", "T_range")) {
      check_n_list(source, n[n["T_list"] ? "T_list" : "T_range"], *T, 0, 2, "T_list");
      c.gibbs.T_list = *T;
    }
    if (n["mode"]) {
      c.gibbs.mode = scalar<std::string>(source, n["mode"], "mode");
      if (c.gibbs.mode != "measure" && c.gibbs.mode != "volume" && c.gibbs.mode != "both") {
        fail(source, n["mode"], "mode must be measure, volume or both");
      }
    }
    if (n["window_y_max"]) {
      if (n["window_y_max"].IsNull()) {
        c.gibbs.window_y_max.reset();
      } else {
        c.gibbs.window_y_max = scalar<double>(source, n["window_y_max"], "window_y_max");
        if (!(*c.gibbs.window_y_max > 1.0)) fail(source, n["window_y_max"], "window_y_max must be > 1");
      }
    }
    if (n["base_vectors"]) {
      c.gibbs.base_vectors = scalar<int>(source, n["base_vectors"], "base_vectors");
      if (c.gibbs.base_vectors < 1) fail(source, n["base_vectors"], "base_vectors must be >= 1");
    }
    if (n["n_samples"]) {
      c.gibbs.n_samples = scalar<long>(source, n["n_samples"], "n_samples");
      if (c.gibbs.n_samples < 1000) fail(source, n["n_samples"], "n_samples must be >= 1000");
    }
    if (n["log_c_max"]) {
      c.gibbs.log_c_max = scalar<double>(source, n["log_c_max"], "log_c_max");
      if (!(c.gibbs.log_c_max > 0.0)) fail(source, n["log_c_max"], "log_c_max must be positive");
    }
  }
  if (const auto n = root["report"]) {
    check_keys(source, n, {"ruelle_tol", "pesin_tol"}, "report");
    if (n["ruelle_tol"]) c.report.ruelle_tol = scalar<double>(source, n["ruelle_tol"], "ruelle_tol");
    if (n["pesin_tol"]) c.report.pesin_tol = scalar<double>(source, n["pesin_tol"], "pesin_tol");
  }
  try {
    validate(c);
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config");
  std::stringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path);
}

void validate(const ExperimentConfig& c) {
  const auto ids = system_ids();
  if (std::find(ids.begin(), ids.end(), c.system) == ids.end()) {
    throw ConfigError("unknown system '" + c.system + "'");
  }
  if (c.measure.rfind("file:", 0) != 0) {
    const auto sys = make_system(c.system);
    const auto measures = measure_ids(*sys);
    if (std::find(measures.begin(), measures.end(), c.measure) == measures.end()) {
      throw ConfigError("measure '" + c.measure + "' is not available for " + c.system);
    }
  } else if (c.measure.size() == 5) {
    throw ConfigError("file measure needs a path");
  }
  if (c.cloud_size < 1000) throw ConfigError("cloud_size must be >= 1000");
  const auto grid = [](const std::vector<double>& r, const std::vector<int>& n, const char* block) {
    if (r.empty()) throw ConfigError(std::string(block) + ": r_list is empty");
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (!(r[i] > 0.0) || (i > 0 && !(r[i] < r[i - 1]))) {
        throw ConfigError(std::string(block) + ": r_list must be positive and descending");
      }
    }
    if (n.size() < 2) throw ConfigError(std::string(block) + ": n_list needs at least two entries");
    for (std::size_t i = 0; i < n.size(); ++i) {
      if (n[i] < 1 || (i > 0 && !(n[i] > n[i - 1]))) {
        throw ConfigError(std::string(block) + ": n_list must be positive and ascending");
      }
    }
  };
  grid(c.katok.r_list, c.katok.n_list, "katok");
  grid(c.brin_katok.r_list, c.brin_katok.n_list, "brin_katok");
  grid(c.riemannian.r_list, c.riemannian.n_list, "riemannian");
  if (!(c.katok.delta > 0.0 && c.katok.delta < 1.0)) throw ConfigError("katok: delta must lie in (0, 1)");
  if (c.lyapunov.steps < 100) throw ConfigError("lyapunov: steps must be >= 100");
  if (c.gibbs.T_list.size() < 2) throw ConfigError("gibbs: T_list needs at least two entries");
  for (std::size_t i = 0; i < c.gibbs.T_list.size(); ++i) {
    if (c.gibbs.T_list[i] < 0 || (i > 0 && c.gibbs.T_list[i] <= c.gibbs.T_list[i - 1])) {
      throw ConfigError("gibbs: T_list must be ascending and >= 0");
    }
  }
}

nlohmann::json to_json(const ExperimentConfig& c) {
  using nlohmann::json;
  const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json j;
  j["system"] = c.system;
  j["measure"] = c.measure;
  j["seed"] = c.seed;
  j["cloud_size"] = c.cloud_size;
  j["stages"] = c.stages;
  j["methods"] = c.methods;
  j["lyapunov"] = {{"steps", c.lyapunov.steps}};
  j["katok"] = {{"r_list", c.katok.r_list}, {"n_list", c.katok.n_list}, {"delta", c.katok.delta}};
  j["brin_katok"] = {{"r_list", c.brin_katok.r_list},
                     {"n_list", c.brin_katok.n_list},
                     {"panel_size", c.brin_katok.panel_size}};
  j["riemannian"] = {{"r_list", c.riemannian.r_list},
                     {"n_list", c.riemannian.n_list},
                     {"n_samples", c.riemannian.n_samples},
                     {"panel_size", c.riemannian.panel_size},
                     {"window_y_max", opt(c.riemannian.window_y_max)}};
  j["gibbs"] = {{"r", c.gibbs.r},
                {"T_list", c.gibbs.T_list},
                {"mode", c.gibbs.mode},
                {"window_y_max", opt(c.gibbs.window_y_max)},
                {"base_vectors", c.gibbs.base_vectors},
                {"n_samples", c.gibbs.n_samples},
                {"log_c_max", c.gibbs.log_c_max}};
  j["report"] = {{"ruelle_tol", c.report.ruelle_tol}, {"pesin_tol", opt(c.report.pesin_tol)}};
  return j;
}

}  // namespace ergo::cli
