#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ergo/core/cloud.hpp"
#include "ergo/core/system.hpp"
#include "ergo/entropy/entropy.hpp"
#include "ergo/entropy/sample_cloud.hpp"

namespace ergo {

using Potential = std::function<double(const StatePoint&)>;

// The model's geometric potential -log J^u (constant -1 on the geodesic flow).
Potential geometric_potential(const SystemModel& sys);

// Σ_{t<T} F(T^t x), the time-1 discretization of ∫_0^T F(g^t x) dt. T = 0 gives 0.
double birkhoff_sum(const SystemModel& sys, const Potential& f, const StatePoint& x, int T);
// birkhoff_sum / T; requires T >= 1.
double birkhoff_average(const SystemModel& sys, const Potential& f, const StatePoint& x, int T);

enum class GibbsMode { Measure, Volume };
std::string_view to_string(GibbsMode m);

struct GibbsRow {
  int T = 0;
  double log_ball_mass = 0.0;
  double birkhoff_sum = 0.0;
  double ratio = 0.0;  // log_ball_mass - (birkhoff_sum - c T)
  double std_err = 0.0;
  long count = 0;  // cloud points or accepted samples in B_T
  bool resolved = true;
};

struct GibbsOptions {
  GibbsMode mode = GibbsMode::Volume;
  CompactWindow window = CompactWindow::whole_space();
  long n_samples = 200000;  // volume mode
  std::uint64_t seed = 0;   // volume mode
  double c = 0.0;           // pressure constant of the potential
  double log_c_max = 2.995732273553991;  // log 20
};

// B_T(v, r) is the dynamical ball over times 0..T, i.e. B_{T+1} in map steps.
// Measure mode: log of the cloud fraction in the ball. Volume mode: log of the
// reference volume (T = 0 gives the log volume of the metric ball).
struct GibbsDiagnostics {
  StatePoint v;
  double r = 0.0;
  GibbsMode mode = GibbsMode::Volume;
  std::vector<GibbsRow> rows;    // returning T only
  std::vector<int> excluded_T;   // T with g^T v outside the window
  double ratio_spread = 0.0;     // over resolved rows
  double slope = 0.0;            // least squares of log_ball_mass vs T over resolved rows
  double log_c_max = 0.0;
  bool passes = false;
};

// Throws DomainError if v is outside the window or T_list is not ascending
// and >= 0, UnresolvedError if no T returns or fewer than two rows resolve.
GibbsDiagnostics gibbs_check(const SystemModel& sys, const StatePoint& v, double r,
                             std::span<const int> T_list, const GibbsOptions& options,
                             const DynamicalCloud* cloud = nullptr,
                             const Potential& f = nullptr);

struct ReportConfig {
  std::uint64_t seed = 0;
  double delta = 0.1;
  std::vector<double> katok_r;
  std::vector<int> katok_n;
  std::vector<double> bk_r;
  std::vector<int> bk_n;
  int panel_size = 20;
  std::vector<double> riemannian_r;
  std::vector<int> riemannian_n;
  long riemannian_samples = 100000;
  CompactWindow window = CompactWindow::whole_space();
  long lyapunov_steps = 10000;
  double ruelle_tol = 0.1;
};

struct RuelleReport {
  std::string system_id;
  std::string measure_id;
  std::map<std::string, EntropyEstimate> h_estimates;  // keyed by method name
  double chi_plus = 0.0;
  std::string best_method;  // katok-delta if resolved, else riemannian-local
  double h_best = 0.0;
  double h_max = 0.0;       // max of the resolved katok / brin-katok values
  double slack = 0.0;       // chi_plus - h_max
  std::optional<double> pesin_gap;  // |h_best - chi_plus|, a.c. measures only
  double potential_integral = 0.0;  // ∫F dμ over the cloud
  double pressure = 0.0;            // h_best + ∫F dμ
  double ruelle_tol = 0.1;
  bool ruelle_holds = false;
  bool complete = false;
  std::vector<std::string> unresolved;  // components that did not resolve
};

// Assembles entropy estimates on the cloud, χ⁺ at the first cloud point and the pressure.
RuelleReport ruelle_report(const SystemModel& sys, const SampleCloud& cloud, const ReportConfig& config);

struct PesinResult {
  double gap = 0.0;
  double tolerance = 0.0;
  bool passes = false;
};

// Default tolerance: 0.15 on the geodesic flow, 0.1 otherwise.
double default_pesin_tolerance(const std::string& system_id);
// Throws DomainError for measures that are not absolutely continuous and
// UnresolvedError for partial reports.
PesinResult pesin_check(const RuelleReport& report, std::optional<double> tolerance = std::nullopt);

}  // namespace ergo
