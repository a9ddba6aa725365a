#include "ergo/thermo/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ergo/core/errors.hpp"
#include "ergo/core/fit.hpp"
#include "ergo/core/orbit.hpp"
#include "ergo/core/rng.hpp"
#include "ergo/core/volume.hpp"
#include "ergo/lyapunov/lyapunov.hpp"

namespace ergo {

Potential geometric_potential(const SystemModel& sys) {
  return [&sys](const StatePoint& x) { return sys.geometric_potential(x); };
}

double birkhoff_sum(const SystemModel& sys, const Potential& f, const StatePoint& x, int T) {
  if (T < 0) throw DomainError("birkhoff: T must be >= 0");
  double sum = 0.0;
  StatePoint p = x;
  for (int t = 0; t < T; ++t) {
    sum += f(p);
    if (t + 1 < T) {
      try {
        p = sys.step(p);
      } catch (const DivergenceError& e) {
        throw e.shifted(t);
      }
    }
  }
  return sum;
}

double birkhoff_average(const SystemModel& sys, const Potential& f, const StatePoint& x, int T) {
  if (T < 1) throw DomainError("birkhoff: T must be >= 1");
  return birkhoff_sum(sys, f, x, T) / T;
}

std::string_view to_string(GibbsMode m) { return m == GibbsMode::Measure ? "measure" : "volume"; }

GibbsDiagnostics gibbs_check(const SystemModel& sys, const StatePoint& v, double r,
                             std::span<const int> T_list, const GibbsOptions& options,
                             const DynamicalCloud* cloud, const Potential& f) {
  if (T_list.empty()) throw DomainError("gibbs: T_list is empty");
  for (std::size_t i = 0; i < T_list.size(); ++i) {
    if (T_list[i] < 0 || (i > 0 && T_list[i] <= T_list[i - 1])) {
      throw DomainError("gibbs: T_list must be ascending and >= 0");
    }
  }
  if (!sys.in_window(v, options.window)) throw DomainError("gibbs: v is outside the window");
  if (options.mode == GibbsMode::Measure && cloud == nullptr) {
    throw DomainError("gibbs: measure mode needs a cloud");
  }
  const Potential potential = f ? f : geometric_potential(sys);
  const int n_max = T_list.back() + 1;
  const OrbitSegment orbit = iterate(sys, v, n_max);

  GibbsDiagnostics out;
  out.v = v;
  out.r = r;
  out.mode = options.mode;
  out.log_c_max = options.log_c_max;

  std::vector<double> log_mass(static_cast<std::size_t>(n_max));
  std::vector<double> std_err(log_mass.size());
  std::vector<long> counts(log_mass.size());
  std::vector<char> resolved(log_mass.size());
  if (options.mode == GibbsMode::Measure) {
    const auto profile = cloud->mass_profile(orbit.states, n_max, r);
    const double total = static_cast<double>(cloud->size());
    for (std::size_t k = 0; k < profile.size(); ++k) {
      counts[k] = profile[k];
      resolved[k] = profile[k] >= kMinBallCount;
      const double p = static_cast<double>(profile[k]) / total;
      log_mass[k] = profile[k] > 0 ? std::log(p) : -std::numeric_limits<double>::infinity();
      std_err[k] = profile[k] > 0 ? std::sqrt((1.0 - p) / static_cast<double>(profile[k])) : 0.0;
    }
  } else {
    const auto profile = ball_volume_profile(sys, v, n_max, r, options.n_samples, options.seed);
    for (std::size_t k = 0; k < profile.size(); ++k) {
      counts[k] = profile[k].n_accepted;
      resolved[k] = profile[k].n_accepted >= kMinAccepted;
      log_mass[k] = profile[k].mean > 0 ? std::log(profile[k].mean)
                                        : -std::numeric_limits<double>::infinity();
      std_err[k] = profile[k].mean > 0 ? profile[k].std_err / profile[k].mean : 0.0;
    }
  }

  double sum = 0.0;
  int t_done = 0;
  std::vector<double> ts, ys, ratios;
  for (int T : T_list) {
    for (; t_done < T; ++t_done) sum += potential(orbit[t_done]);
    if (!sys.in_window(orbit[T], options.window)) {
      out.excluded_T.push_back(T);
      continue;
    }
    GibbsRow row;
    row.T = T;
    row.log_ball_mass = log_mass[static_cast<std::size_t>(T)];
    row.birkhoff_sum = sum;
    row.ratio = row.log_ball_mass - (sum - options.c * T);
    row.std_err = std_err[static_cast<std::size_t>(T)];
    row.count = counts[static_cast<std::size_t>(T)];
    row.resolved = resolved[static_cast<std::size_t>(T)];
    out.rows.push_back(row);
    if (row.resolved) {
      ts.push_back(T);
      ys.push_back(row.log_ball_mass);
      ratios.push_back(row.ratio);
    }
  }
  if (out.rows.empty()) throw UnresolvedError("gibbs: no returning T");
  if (ratios.size() < 2) throw UnresolvedError("gibbs: underresolved masses");
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  out.ratio_spread = *hi - *lo;
  out.slope = least_squares(ts, ys).slope;
  out.passes = out.ratio_spread <= options.log_c_max;
  return out;
}

namespace {

void record(RuelleReport& report, const EntropyEstimate& est) {
  const std::string key(to_string(est.method));
  report.h_estimates[key] = est;
  if (!est.resolved) report.unresolved.push_back(key);
}

}  // namespace

RuelleReport ruelle_report(const SystemModel& sys, const SampleCloud& cloud, const ReportConfig& config) {
  if (cloud.points.empty()) throw DomainError("report: empty cloud");
  RuelleReport report;
  report.system_id = sys.id();
  report.measure_id = cloud.measure_id;
  report.ruelle_tol = config.ruelle_tol;

  int n_max = 1;
  double r_max = 0.0;
  if (!config.katok_n.empty()) n_max = std::max(n_max, config.katok_n.back());
  if (!config.bk_n.empty()) n_max = std::max(n_max, config.bk_n.back());
  if (!config.katok_r.empty()) r_max = std::max(r_max, config.katok_r.front());
  if (!config.bk_r.empty()) r_max = std::max(r_max, config.bk_r.front());
  const DynamicalCloud dyn(sys, cloud.points, n_max, r_max);

  const EntropyEstimate katok = katok_entropy(dyn, config.delta, config.katok_r, config.katok_n);
  record(report, katok);

  const std::size_t panel_size =
      std::min(cloud.points.size(), static_cast<std::size_t>(std::max(config.panel_size, 1)));
  const std::span<const StatePoint> panel(cloud.points.data(), panel_size);
  const BrinKatokPanel bk = brin_katok_panel(dyn, panel, config.bk_r, config.bk_n);
  record(report, bk.lower);
  record(report, bk.upper);

  // Riemannian-local needs the chart to hold the largest ball at each panel point.
  std::vector<StatePoint> r_panel;
  const double r_riem = config.riemannian_r.empty() ? 0.0 : config.riemannian_r.front();
  for (const auto& p : cloud.points) {
    if (r_panel.size() == panel_size) break;
    if (sys.in_window(p, config.window) && sys.chart_radius(p) >= r_riem) r_panel.push_back(p);
  }
  const EntropyEstimate riem =
      riemannian_local_panel(sys, r_panel, config.window, config.riemannian_r, config.riemannian_n,
                             config.riemannian_samples, derive_seed(config.seed, 1));
  record(report, riem);

  // χ⁺ at the first cloud point whose orbit stays in range.
  bool have_chi = false;
  for (std::size_t i = 0; i < cloud.points.size() && i < 16 && !have_chi; ++i) {
    try {
      report.chi_plus =
          chi_plus(qr_spectrum(sys, cloud.points[i], config.lyapunov_steps, derive_seed(config.seed, 2)));
      have_chi = true;
    } catch (const DivergenceError&) {
    }
  }
  if (!have_chi) report.unresolved.push_back("chi-plus");

  // Riemannian-local measures reference-volume decay, which matches h_μ only for
  // a.c. measures, so it is kept out of the Ruelle maximum.
  bool have_h = false;
  report.h_max = 0.0;
  for (const auto* est : {&katok, &bk.lower, &bk.upper}) {
    if (!est->resolved) continue;
    report.h_max = have_h ? std::max(report.h_max, est->value) : est->value;
    have_h = true;
  }
  if (katok.resolved) {
    report.best_method = std::string(to_string(katok.method));
    report.h_best = katok.value;
  } else if (riem.resolved) {
    report.best_method = std::string(to_string(riem.method));
    report.h_best = riem.value;
  }

  double integral = 0.0;
  const Potential f = geometric_potential(sys);
  for (const auto& p : cloud.points) integral += f(p);
  report.potential_integral = integral / static_cast<double>(cloud.points.size());

  report.complete = have_chi && have_h && !report.best_method.empty();
  report.slack = report.chi_plus - report.h_max;
  report.ruelle_holds = report.complete && report.slack >= -config.ruelle_tol;
  report.pressure = report.h_best + report.potential_integral;
  if (report.complete && absolutely_continuous(report.measure_id)) {
    report.pesin_gap = std::abs(report.h_best - report.chi_plus);
  }
  return report;
}

double default_pesin_tolerance(const std::string& system_id) {
  return system_id == "modular-geodesic" ? 0.15 : 0.1;
}

PesinResult pesin_check(const RuelleReport& report, std::optional<double> tolerance) {
  if (!absolutely_continuous(report.measure_id)) {
    throw DomainError("pesin: measure '" + report.measure_id +
                      "' is not absolutely continuous; the entropy formula is only expected for "
                      "the Lebesgue/Liouville measure");
  }
  if (!report.complete || !report.pesin_gap) throw UnresolvedError("pesin: report is partial");
  PesinResult out;
  out.gap = *report.pesin_gap;
  out.tolerance = tolerance.value_or(default_pesin_tolerance(report.system_id));
  out.passes = out.gap <= out.tolerance;
  return out;
}

}  // namespace ergo
