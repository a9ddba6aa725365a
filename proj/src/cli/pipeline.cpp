#include "ergo/cli/pipeline.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>

#include "ergo/core/cloud.hpp"
#include "ergo/core/errors.hpp"
#include "ergo/core/orbit.hpp"
#include "ergo/core/rng.hpp"
#include "ergo/lyapunov/lyapunov.hpp"
#include "ergo/models/registry.hpp"
#include "ergo/thermo/thermo.hpp"

namespace ergo::cli {

using nlohmann::json;

std::uint64_t stage_seed(const ExperimentConfig& config, SeedStream stream) {
  return derive_seed(config.seed, static_cast<std::uint64_t>(stream));
}

namespace {

CompactWindow window_of(const std::optional<double>& y_max) {
  return y_max ? CompactWindow::cusp_cutoff(*y_max) : CompactWindow::whole_space();
}

int max_of(const std::vector<int>& a, const std::vector<int>& b) {
  return std::max(a.empty() ? 1 : a.back(), b.empty() ? 1 : b.back());
}

}  // namespace

ReportConfig report_config(const ExperimentConfig& c) {
  ReportConfig r;
  r.seed = c.seed;
  r.delta = c.katok.delta;
  r.katok_r = c.katok.r_list;
  r.katok_n = c.katok.n_list;
  r.bk_r = c.brin_katok.r_list;
  r.bk_n = c.brin_katok.n_list;
  r.panel_size = c.brin_katok.panel_size;
  r.riemannian_r = c.riemannian.r_list;
  r.riemannian_n = c.riemannian.n_list;
  r.riemannian_samples = c.riemannian.n_samples;
  r.window = window_of(c.riemannian.window_y_max);
  r.lyapunov_steps = c.lyapunov.steps;
  r.ruelle_tol = c.report.ruelle_tol;
  return r;
}

Pipeline::Pipeline(ExperimentConfig config) : config_(std::move(config)), sys_(make_system(config_.system)) {
  validate(config_);
}

const SampleCloud& Pipeline::cloud() {
  if (!cloud_) {
    if (config_.measure.rfind("file:", 0) == 0) {
      cloud_ = load_point_file(*sys_, config_.measure.substr(5));
    } else {
      cloud_ = sample_measure(*sys_, config_.measure, config_.cloud_size, config_.seed);
    }
  }
  return *cloud_;
}

bool Pipeline::lyapunov(ArtifactWriter& out, const std::optional<StatePoint>& point) {
  StatePoint x;
  if (point) {
    x = *point;
  } else if (config_.measure.rfind("file:", 0) == 0) {
    x = cloud().points.front();
  } else {
    x = sample_measure(*sys_, config_.measure, 1, stage_seed(config_, SeedStream::LyapunovPoint)).points[0];
  }
  if (!sys_->in_domain(x)) throw DomainError("lyapunov: point is outside the domain");
  json j{{"system", config_.system}, {"point", to_json(x)}, {"steps", config_.lyapunov.steps}};
  bool resolved = true;
  try {
    const auto spec = qr_spectrum(*sys_, x, config_.lyapunov.steps, stage_seed(config_, SeedStream::Lyapunov));
    j["spectrum"] = to_json(spec);
    std::string line = "lyapunov: spectrum";
    for (const auto& e : spec.exponents) {
      line += fmt::format(" {:.6f}", e.value);
      if (e.multiplicity > 1) line += fmt::format("(x{})", e.multiplicity);
    }
    summary_.push_back(line + fmt::format("  chi+ {:.6f}", chi_plus(spec)));
  } catch (const DivergenceError& e) {
    j["error"] = e.what();
    resolved = false;
    summary_.push_back(std::string("lyapunov: unresolved: ") + e.what());
  }
  j["resolved"] = resolved;
  out.write_json("lyapunov.json", j);
  return resolved;
}

bool Pipeline::entropy(ArtifactWriter& out) {
  const auto& pts = cloud().points;
  const int n_max = max_of(config_.katok.n_list, config_.brin_katok.n_list);
  const double r_max = std::max(config_.katok.r_list.front(), config_.brin_katok.r_list.front());
  const DynamicalCloud dyn(*sys_, pts, n_max, r_max);

  const auto wants = [&](const char* m) {
    return std::find(config_.methods.begin(), config_.methods.end(), m) != config_.methods.end();
  };
  std::vector<EntropyEstimate> estimates;
  if (wants("katok")) {
    estimates.push_back(katok_entropy(dyn, config_.katok.delta, config_.katok.r_list, config_.katok.n_list));
  }
  if (wants("brin-katok")) {
    const std::size_t bk_size = std::min(pts.size(), static_cast<std::size_t>(config_.brin_katok.panel_size));
    const auto bk = brin_katok_panel(dyn, std::span(pts.data(), bk_size), config_.brin_katok.r_list,
                                     config_.brin_katok.n_list);
    estimates.push_back(bk.lower);
    estimates.push_back(bk.upper);
  }
  if (wants("riemannian-local")) {
    const auto window = window_of(config_.riemannian.window_y_max);
    std::vector<StatePoint> panel;
    for (const auto& p : pts) {
      if (static_cast<int>(panel.size()) == config_.riemannian.panel_size) break;
      if (sys_->in_window(p, window) && sys_->chart_radius(p) >= config_.riemannian.r_list.front()) {
        panel.push_back(p);
      }
    }
    estimates.push_back(riemannian_local_panel(*sys_, panel, window, config_.riemannian.r_list,
                                               config_.riemannian.n_list, config_.riemannian.n_samples,
                                               stage_seed(config_, SeedStream::Riemannian)));
  }

  json j{{"system", config_.system},
         {"measure", cloud().measure_id},
         {"seed", config_.seed},
         {"cloud_size", pts.size()},
         {"diverged", dyn.diverged_count()}};
  j["estimates"] = json::array();
  bool resolved = true;
  for (const auto& e : estimates) {
    j["estimates"].push_back(to_json(e));
    resolved = resolved && e.resolved;
    summary_.push_back(fmt::format("entropy: {:<18} {}", to_string(e.method),
                                   e.resolved ? fmt::format("{:.4f} (r = {})", e.value, e.r)
                                              : std::string("unresolved")));
  }
  out.write_json("entropy.json", j);
  out.write("entropy.csv", entropy_csv(estimates));
  return resolved;
}

bool Pipeline::gibbs(ArtifactWriter& out) {
  const auto& g = config_.gibbs;
  const auto window = window_of(g.window_y_max);
  const int T_max = g.T_list.back();

  // Base vectors drawn from the measure whose orbit returns at every T and
  // whose chart holds the ball (volume mode).
  std::vector<StatePoint> base;
  const auto candidates = sample_measure(*sys_, config_.measure.rfind("file:", 0) == 0 ? measure_ids(*sys_).front()
                                                                                       : config_.measure,
                                         100000, stage_seed(config_, SeedStream::Gibbs));
  for (const auto& v : candidates.points) {
    if (static_cast<int>(base.size()) == g.base_vectors) break;
    if (sys_->chart_radius(v) < g.r) continue;
    try {
      const auto orbit = iterate(*sys_, v, T_max + 1);
      bool all = true;
      for (int T : g.T_list) all = all && sys_->in_window(orbit[T], window);
      if (all) base.push_back(v);
    } catch (const DivergenceError&) {
    }
  }

  std::vector<GibbsMode> modes;
  if (g.mode != "volume") modes.push_back(GibbsMode::Measure);
  if (g.mode != "measure") modes.push_back(GibbsMode::Volume);

  std::optional<DynamicalCloud> dyn;
  if (g.mode != "volume") dyn.emplace(*sys_, cloud().points, T_max + 1, g.r);

  json j{{"system", config_.system},
         {"measure", cloud().measure_id},
         {"r", g.r},
         {"T_list", g.T_list},
         {"window_y_max", g.window_y_max ? json(*g.window_y_max) : json(nullptr)},
         {"base_vectors_requested", g.base_vectors},
         {"base_vectors_found", base.size()}};
  std::string csv = "mode,vector,T,log_ball_mass,birkhoff_sum,ratio,std_err,count,resolved\n";
  bool resolved = static_cast<int>(base.size()) == g.base_vectors;
  for (auto mode : modes) {
    json runs = json::array();
    double worst_spread = 0.0, slope_lo = 0.0, slope_hi = 0.0;
    bool all_pass = true, first = true;
    for (std::size_t i = 0; i < base.size(); ++i) {
      GibbsOptions options;
      options.mode = mode;
      options.window = window;
      options.n_samples = g.n_samples;
      options.seed = derive_seed(stage_seed(config_, SeedStream::Gibbs), i);
      options.log_c_max = g.log_c_max;
      try {
        const auto d = gibbs_check(*sys_, base[i], g.r, g.T_list, options, dyn ? &*dyn : nullptr);
        runs.push_back(to_json(d));
        for (const auto& row : d.rows) {
          csv += fmt::format("{},{},{},{},{},{},{},{},{}\n", to_string(mode), i, row.T,
                             format_number(row.log_ball_mass), format_number(row.birkhoff_sum),
                             format_number(row.ratio), format_number(row.std_err), row.count,
                             row.resolved ? 1 : 0);
        }
        worst_spread = std::max(worst_spread, d.ratio_spread);
        slope_lo = first ? d.slope : std::min(slope_lo, d.slope);
        slope_hi = first ? d.slope : std::max(slope_hi, d.slope);
        first = false;
        all_pass = all_pass && d.passes;
      } catch (const UnresolvedError& e) {
        runs.push_back({{"v", to_json(base[i])}, {"error", e.what()}});
        resolved = false;
        all_pass = false;
      }
    }
    const std::string key(to_string(mode));
    j[key] = {{"runs", runs},
              {"max_ratio_spread", worst_spread},
              {"slope_range", {slope_lo, slope_hi}},
              {"all_pass", all_pass}};
    summary_.push_back(fmt::format("gibbs ({}): {} vectors, max spread {:.3f}, slopes [{:.3f}, {:.3f}]{}", key,
                                   base.size(), worst_spread, slope_lo, slope_hi, all_pass ? "" : ", not all pass"));
  }
  out.write_json("gibbs.json", j);
  out.write("gibbs.csv", csv);
  return resolved;
}

bool Pipeline::report(ArtifactWriter& out) {
  const auto report = ruelle_report(*sys_, cloud(), report_config(config_));
  json j = to_json(report);
  std::string pesin_line;
  if (absolutely_continuous(report.measure_id) && report.complete) {
    const auto pesin = pesin_check(report, config_.report.pesin_tol);
    j["pesin"] = {{"gap", pesin.gap}, {"tolerance", pesin.tolerance}, {"passes", pesin.passes}};
    pesin_line = fmt::format(", pesin gap {:.4f} ({})", pesin.gap, pesin.passes ? "pass" : "fail");
  } else if (!absolutely_continuous(report.measure_id)) {
    j["pesin"] = {{"refused", "measure is not absolutely continuous"}};
  }
  out.write_json("report.json", j);

  std::string csv = "system,measure,method,value,resolved,chi_plus,slack,pesin_gap,pressure\n";
  for (const auto& [method, est] : report.h_estimates) {
    csv += fmt::format("{},{},{},{},{},{},{},{},{}\n", report.system_id, report.measure_id, method,
                       format_number(est.value), est.resolved ? 1 : 0, format_number(report.chi_plus),
                       format_number(report.slack), report.pesin_gap ? format_number(*report.pesin_gap) : "",
                       format_number(report.pressure));
  }
  out.write("report.csv", csv);
  summary_.push_back(fmt::format("report: h ({}) {:.4f}, chi+ {:.4f}, slack {:.4f}, pressure {:.4f}{}{}",
                                 report.best_method.empty() ? "none" : report.best_method, report.h_best,
                                 report.chi_plus, report.slack, report.pressure, pesin_line,
                                 report.complete ? "" : ", partial"));
  return report.complete;
}

int Pipeline::run(const std::vector<std::string>& stages) {
  const auto& todo = stages.empty() ? stage_names() : stages;
  ArtifactWriter out(config_.output_dir);
  bool resolved = true;
  for (const auto& stage : stage_names()) {
    if (std::find(todo.begin(), todo.end(), stage) == todo.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      if (stage == "lyapunov") ok = lyapunov(out);
      if (stage == "entropy") ok = entropy(out);
      if (stage == "gibbs") ok = gibbs(out);
      if (stage == "report") ok = report(out);
    } catch (const UnresolvedError& e) {
      summary_.push_back(stage + ": unresolved: " + e.what());
    }
    out.stage_time(stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    resolved = resolved && ok;
  }
  out.write_manifest(to_json(config_));
  return resolved ? kOk : kUnresolved;
}

}  // namespace ergo::cli
