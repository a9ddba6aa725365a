#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace ergo::cli {

// Config problems; `what()` is "<source>:<line>: <message>" when a line is known.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KatokBlock {
  std::vector<double> r_list;
  std::vector<int> n_list;
  double delta = 0.0;
};

struct BrinKatokBlock {
  std::vector<double> r_list;
  std::vector<int> n_list;
  int panel_size = 0;
};

struct RiemannianBlock {
  std::vector<double> r_list;
  std::vector<int> n_list;
  long n_samples = 0;
  int panel_size = 0;
  std::optional<double> window_y_max;
};

struct LyapunovBlock {
  long steps = 0;
};

struct GibbsBlock {
  double r = 0.0;
  std::vector<int> T_list;
  std::string mode;  // measure | volume | both
  std::optional<double> window_y_max;
  int base_vectors = 0;
  long n_samples = 0;
  double log_c_max = 0.0;
};

struct ReportBlock {
  double ruelle_tol = 0.0;
  std::optional<double> pesin_tol;  // per-system default when absent
};

struct ExperimentConfig {
  std::string system;
  std::string measure;  // lebesgue | liouville | periodic-orbit | file:<path>
  std::uint64_t seed = 0;
  long cloud_size = 0;
  std::string output_dir;
  // Stages requested by the config file (all stages for `run` when none are listed).
  std::vector<std::string> stages;
  // Entropy estimators run by the entropy stage (the report always runs all of them).
  std::vector<std::string> methods;
  KatokBlock katok;
  BrinKatokBlock brin_katok;
  RiemannianBlock riemannian;
  LyapunovBlock lyapunov;
  GibbsBlock gibbs;
  ReportBlock report;
};

inline const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names{"lyapunov", "entropy", "gibbs", "report"};
  return names;
}

inline const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names{"katok", "brin-katok", "riemannian-local"};
  return names;
}

// Defaults for a system and measure (the single defaults table, see config.cpp).
ExperimentConfig default_config(const std::string& system, const std::string& measure);

// Parses a YAML config; unknown keys, bad types and invariant violations are
// reported with the line they occur on. The seed is mandatory.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text, const std::string& source);

// Throws ConfigError on invariant violations (lists, delta, sizes).
void validate(const ExperimentConfig& config);

// Canonical JSON of the fully resolved config; hashing it gives the config hash.
nlohmann::json to_json(const ExperimentConfig& config);

}  // namespace ergo::cli
