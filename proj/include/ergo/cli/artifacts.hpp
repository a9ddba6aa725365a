#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ergo/core/types.hpp"
#include "ergo/entropy/entropy.hpp"
#include "ergo/entropy/sample_cloud.hpp"
#include "ergo/lyapunov/lyapunov.hpp"
#include "ergo/thermo/thermo.hpp"

namespace ergo::cli {

inline constexpr const char* kVersion = "0.1.0";

// 17 significant digits, '.' separator, independent of the locale.
std::string format_number(double x);
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

nlohmann::json to_json(const StatePoint& p);
nlohmann::json to_json(const EntropyEstimate& e);
nlohmann::json to_json(const LyapunovSpectrum& s);
nlohmann::json to_json(const GibbsDiagnostics& g);
nlohmann::json to_json(const RuelleReport& r);

// CSV series: method,r,n,value,std_err,resolved,point (point = -1 unless a panel).
std::string entropy_csv(const std::vector<EntropyEstimate>& estimates);

// Point file readable by load_point_file.
std::string point_file(const SystemModel& sys, const std::vector<StatePoint>& points);

// Writes files under one directory and records them for the manifest.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  void write(const std::string& name, const std::string& content);
  void write_json(const std::string& name, const nlohmann::json& j);
  void stage_time(const std::string& stage, double seconds);
  // manifest.json: config hash, versions, wall-clock per stage, file checksums.
  void write_manifest(const nlohmann::json& config);

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;  // name, sha256
  nlohmann::json timings_ = nlohmann::json::object();
};

}  // namespace ergo::cli
