#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ergo/cli/artifacts.hpp"
#include "ergo/cli/config.hpp"
#include "ergo/core/system.hpp"
#include "ergo/entropy/sample_cloud.hpp"

namespace ergo::cli {

enum ExitCode { kOk = 0, kFailure = 1, kConfigError = 2, kUnresolved = 3 };

// Stage seeds are derived from the config seed; the cloud uses the seed itself
// so that `sample` with the same seed writes the same points.
enum class SeedStream : std::uint64_t { Riemannian = 1, Lyapunov = 2, Gibbs = 3, LyapunovPoint = 4 };
std::uint64_t stage_seed(const ExperimentConfig& config, SeedStream stream);

class Pipeline {
 public:
  explicit Pipeline(ExperimentConfig config);

  const ExperimentConfig& config() const { return config_; }
  const SystemModel& system() const { return *sys_; }
  const SampleCloud& cloud();

  // Each stage writes its artifacts and returns whether it resolved.
  bool lyapunov(ArtifactWriter& out, const std::optional<StatePoint>& point = std::nullopt);
  bool entropy(ArtifactWriter& out);
  bool gibbs(ArtifactWriter& out);
  bool report(ArtifactWriter& out);

  // Runs the listed stages (all when empty), writes the manifest, returns the exit code.
  int run(const std::vector<std::string>& stages);

  // One-line summaries of what the stages found, for the terminal.
  const std::vector<std::string>& summary() const { return summary_; }

 private:
  ExperimentConfig config_;
  std::unique_ptr<SystemModel> sys_;
  std::optional<SampleCloud> cloud_;
  std::vector<std::string> summary_;
};

ReportConfig report_config(const ExperimentConfig& config);

}  // namespace ergo::cli
