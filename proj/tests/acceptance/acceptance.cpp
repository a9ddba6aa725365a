// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.
// Criteria can be selected by number: `acceptance 1 5 9`.

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "../oracles.hpp"
#include "ergo/cli/artifacts.hpp"
#include "ergo/cli/config.hpp"
#include "ergo/cli/pipeline.hpp"
#include "ergo/core/cloud.hpp"
#include "ergo/core/errors.hpp"
#include "ergo/core/orbit.hpp"
#include "ergo/core/rng.hpp"
#include "ergo/entropy/entropy.hpp"
#include "ergo/lyapunov/lyapunov.hpp"
#include "ergo/models/psl2.hpp"
#include "ergo/models/registry.hpp"
#include "ergo/thermo/thermo.hpp"

using namespace ergo;
namespace fs = std::filesystem;

namespace {

const double kLog2 = std::log(2.0);
const double kCat = std::log((3.0 + std::sqrt(5.0)) / 2.0);

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Reports shared between criteria 5, 7 and 8, built from the CLI defaults.
struct ReportCase {
  std::string system, measure;
  RuelleReport report;
  double seconds = 0.0;
};

std::vector<ReportCase>& reports() {
  static std::vector<ReportCase> cases = [] {
    std::vector<ReportCase> out;
    const std::vector<std::pair<std::string, std::string>> pairs{{"doubling", "lebesgue"},
                                                                 {"cat", "lebesgue"},
                                                                 {"identity", "lebesgue"},
                                                                 {"modular-geodesic", "liouville"},
                                                                 {"modular-geodesic", "periodic-orbit"}};
    for (const auto& [system, measure] : pairs) {
      auto config = cli::default_config(system, measure);
      config.seed = 20240611;
      const auto start = std::chrono::steady_clock::now();
      const auto sys = make_system(system);
      const auto cloud = sample_measure(*sys, measure, config.cloud_size, config.seed);
      ReportCase c{system, measure, ruelle_report(*sys, cloud, cli::report_config(config)), 0.0};
      c.seconds = seconds_since(start);
      out.push_back(std::move(c));
    }
    return out;
  }();
  return cases;
}

const ReportCase& report_for(const std::string& system, const std::string& measure) {
  for (const auto& c : reports()) {
    if (c.system == system && c.measure == measure) return c;
  }
  throw Error("no report for " + system);
}

Outcome lyapunov_oracle() {
  Outcome o;
  const auto cat = make_system("cat");
  const auto start = std::chrono::steady_clock::now();
  const auto spec = qr_spectrum(*cat, StatePoint{0.31, 0.77}, 10000, 7);
  const double t = seconds_since(start);
  const double err = std::max(std::abs(spec.raw[0] - kCat), std::abs(spec.raw[1] + kCat));
  o.check(err <= 1e-3 && t < 1.0, fmt::format("cat +-{:.6f} err {:.1e} in {:.3f} s", kCat, err, t));

  const auto modular = make_system("modular-geodesic");
  const auto x = psl2::to_state(psl2::liouville_sample(1, 2024)[0]);
  const auto mspec = qr_spectrum(*modular, x, 10000, 7);
  double merr = 0.0;
  const double expected[3] = {1.0, 0.0, -1.0};
  for (int i = 0; i < 3; ++i) merr = std::max(merr, std::abs(mspec.raw[i] - expected[i]));
  o.check(merr <= 1e-6, fmt::format("modular {{1,0,-1}} err {:.1e}", merr));
  return o;
}

Outcome linearized_balls() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const auto doubling = make_system("doubling");
  const auto d = decay_rate(*doubling, StatePoint{0.3}, 0.1, {2, 4, 6, 8, 10, 12}, 200000, 3);
  o.check(std::abs(d.slope / kLog2 - 1.0) <= 0.05, fmt::format("doubling slope {:.4f}", d.slope));

  const auto cat = make_system("cat");
  const std::vector<int> n_list{2, 4, 6, 8, 10, 12, 14};
  const auto mc = decay_rate(*cat, StatePoint{0.33, 0.12}, 0.1, n_list, 200000, 9);
  // polygon clipping of the pulled-back disks, independent of the library volume code
  std::vector<double> ns, logs;
  for (int n : {8, 10, 12, 14}) {
    ns.push_back(n);
    logs.push_back(-std::log(oracle::cat_dyn_ball_area(n, 0.1)));
  }
  const double polygon_slope = (logs.back() - logs.front()) / (ns.back() - ns.front());
  o.check(std::abs(mc.slope / kCat - 1.0) <= 0.05 && std::abs(polygon_slope / kCat - 1.0) <= 0.05,
          fmt::format("cat MC slope {:.4f}, polygon slope {:.4f}", mc.slope, polygon_slope));

  const auto modular = make_system("modular-geodesic");
  const auto x = psl2::to_state(psl2::liouville_sample(1, 2024)[0]);
  const auto m = decay_rate(*modular, x, 0.1, {2, 4, 6, 8, 10, 12}, 200000, 5);
  o.check(std::abs(m.slope - 1.0) <= 0.05, fmt::format("modular slope {:.4f}", m.slope));
  const double t = seconds_since(start);
  o.check(t < 120.0, fmt::format("{:.1f} s", t));
  return o;
}

Outcome covering_sandwich() {
  Outcome o;
  Rng rng(4242);
  const std::vector<std::string> systems{"identity", "doubling", "cat", "modular-geodesic"};
  int instances = 0, violations = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto& id = systems[static_cast<std::size_t>(trial) % systems.size()];
    const auto sys = make_system(id);
    const long size = 200 + static_cast<long>(rng.uniform() * 1500);
    const auto pts = sample_measure(*sys, measure_ids(*sys).front(), size, rng.bits()).points;
    const double r_top = id == "modular-geodesic" ? 0.5 : 0.3;
    const DynamicalCloud cloud(*sys, pts, 6, r_top);
    for (int k = 0; k < 4; ++k) {
      const int n = 1 + static_cast<int>(rng.uniform() * 6);
      const double r = rng.uniform(0.02, r_top);
      const long cover = covering_count(cloud, n, r);
      const long sep = static_cast<long>(separated_set(cloud, n, r).size());
      const long cover_half = covering_count(cloud, n, r / 2);
      if (cover > sep || sep > cover_half) ++violations;
      ++instances;
    }
  }
  o.check(instances >= 200 && violations == 0, fmt::format("{} instances, {} violations", instances, violations));
  return o;
}

Outcome delta_monotone() {
  Outcome o;
  int compared = 0, violations = 0;
  for (const std::string id : {"doubling", "cat", "modular-geodesic"}) {
    const auto sys = make_system(id);
    const bool modular = id == "modular-geodesic";
    const auto pts = sample_measure(*sys, measure_ids(*sys).front(), modular ? 50000 : 20000, 5).points;
    const std::vector<double> r_list = modular ? std::vector<double>{0.5, 0.4} : std::vector<double>{0.1, 0.07};
    const std::vector<int> n_list{1, 2, 3, 4, 5, 6};
    const DynamicalCloud cloud(*sys, pts, 6, r_list.front());
    std::vector<EntropyEstimate> est;
    for (double delta : {0.5, 0.3, 0.2, 0.1, 0.05}) est.push_back(katok_entropy(cloud, delta, r_list, n_list));
    for (std::size_t a = 0; a + 1 < est.size(); ++a) {
      for (std::size_t c = 0; c < est[a].cells.size(); ++c) {
        const auto& big = est[a].cells[c];
        const auto& small = est[a + 1].cells[c];
        if (big.count < 0 || small.count < 0) continue;
        ++compared;
        if (big.count > small.count) ++violations;
      }
    }
  }
  o.check(compared > 0 && violations == 0, fmt::format("{} comparisons, {} violations", compared, violations));
  return o;
}

Outcome entropy_chain() {
  Outcome o;
  for (const auto& [system, target, limit] :
       {std::tuple{"doubling", kLog2, 300.0}, std::tuple{"cat", kCat, 300.0}}) {
    const auto& c = report_for(system, "lebesgue");
    std::string values;
    bool ok = true;
    for (const auto& [method, est] : c.report.h_estimates) {
      ok = ok && est.resolved && std::abs(est.value / target - 1.0) <= 0.1;
      values += fmt::format(" {} {:.4f}", method, est.value);
    }
    o.check(ok && c.seconds < limit, fmt::format("{}:{} ({:.0f} s)", system, values, c.seconds));
  }
  return o;
}

Outcome gibbs_property() {
  Outcome o;
  auto config = cli::default_config("modular-geodesic", "liouville");
  config.seed = 20240611;
  config.output_dir = (fs::temp_directory_path() / "ergo_acceptance_gibbs").string();
  cli::Pipeline p(config);
  cli::ArtifactWriter out(config.output_dir);
  p.gibbs(out);
  const auto j = nlohmann::json::parse(slurp(fs::path(config.output_dir) / "gibbs.json"));
  o.check(j["base_vectors_found"] == 10 && p.cloud().points.size() == 1000000,
          fmt::format("{} vectors, cloud {}", j["base_vectors_found"].get<int>(), p.cloud().points.size()));
  for (const char* mode : {"measure", "volume"}) {
    double spread = 0.0, slope_lo = 0.0, slope_hi = -2.0;
    bool ok = true;
    int max_T = 0;
    for (const auto& run : j[mode]["runs"]) {
      if (!run.contains("ratio_spread")) {
        ok = false;
        continue;
      }
      const double s = run["slope"];
      spread = std::max(spread, run["ratio_spread"].get<double>());
      slope_lo = std::min(slope_lo, s);
      slope_hi = std::max(slope_hi, s);
      ok = ok && run["ratio_spread"].get<double>() <= 1.5 && s >= -1.2 && s <= -0.85;
      for (const auto& row : run["rows"]) {
        if (row["resolved"]) max_T = std::max(max_T, row["T"].get<int>());
      }
    }
    o.check(ok, fmt::format("{}: spread <= {:.3f}, slopes [{:.3f}, {:.3f}], T <= {}", mode, spread, slope_lo,
                            slope_hi, max_T));
  }
  return o;
}

Outcome ruelle_inequality() {
  Outcome o;
  for (const auto& c : reports()) {
    const bool periodic = c.measure == "periodic-orbit";
    const double floor = periodic ? 0.8 : -0.1;
    o.check(c.report.complete && c.report.slack >= floor,
            fmt::format("{}/{} slack {:.4f}", c.system, c.measure, c.report.slack));
  }
  return o;
}

Outcome pesin_equality() {
  Outcome o;
  for (const auto& [system, measure, tol] :
       {std::tuple{"doubling", "lebesgue", 0.1}, std::tuple{"cat", "lebesgue", 0.1},
        std::tuple{"modular-geodesic", "liouville", 0.15}}) {
    const auto& c = report_for(system, measure);
    const auto pesin = pesin_check(c.report, tol);
    o.check(pesin.passes && pesin.gap <= tol, fmt::format("{} gap {:.4f}", system, pesin.gap));
  }
  const auto& m = report_for("modular-geodesic", "liouville");
  o.check(std::abs(m.report.pressure) <= 0.15, fmt::format("P(F) {:.4f}", m.report.pressure));
  return o;
}

Outcome determinism() {
  Outcome o;
  const auto root = fs::temp_directory_path() / "ergo_acceptance_determinism";
  fs::remove_all(root);
  int files = 0, differing = 0;
  for (const auto& [system, measure] :
       {std::pair{"doubling", "lebesgue"}, std::pair{"cat", "lebesgue"}, std::pair{"identity", "lebesgue"},
        std::pair{"modular-geodesic", "liouville"}, std::pair{"modular-geodesic", "periodic-orbit"}}) {
    std::vector<fs::path> dirs;
    for (const char* run : {"a", "b"}) {
      auto config = cli::default_config(system, measure);
      config.seed = 99;
      config.cloud_size = std::min(config.cloud_size, 20000L);
      config.riemannian.n_samples = 50000;
      config.gibbs.n_samples = 50000;
      config.gibbs.T_list = {0, 1, 2, 3, 4};
      config.output_dir = (root / (std::string(system) + "-" + measure) / run).string();
      dirs.emplace_back(config.output_dir);
      cli::Pipeline(config).run({});
    }
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      const auto name = entry.path().filename();
      std::string a = slurp(dirs[0] / name), b = slurp(dirs[1] / name);
      if (name == "manifest.json") {
        auto ja = nlohmann::json::parse(a), jb = nlohmann::json::parse(b);
        ja.erase("wall_clock_seconds");
        jb.erase("wall_clock_seconds");
        a = ja.dump();
        b = jb.dump();
      }
      ++files;
      if (a != b) ++differing;
    }
  }
  o.check(files >= 5 * 8 && differing == 0, fmt::format("{} files compared, {} differ", files, differing));
  return o;
}

Outcome trivial_cases() {
  Outcome o;
  const auto& id = report_for("identity", "lebesgue");
  double worst = 0.0;
  bool resolved = true;
  for (const auto& [method, est] : id.report.h_estimates) {
    worst = std::max(worst, std::abs(est.value));
    resolved = resolved && est.resolved;
  }
  const auto identity = make_system("identity");
  const auto spec = qr_spectrum(*identity, StatePoint{0.4}, 10000, 1);
  o.check(resolved && worst <= 1e-9 && spec.raw[0] == 0.0 && id.report.chi_plus == 0.0,
          fmt::format("identity max |h| {:.1e}, chi {}", worst, spec.raw[0]));

  long checked = 0, mismatched = 0;
  for (const std::string sid : {"identity", "doubling", "cat", "modular-geodesic"}) {
    const auto sys = make_system(sid);
    const auto pts = sample_measure(*sys, measure_ids(*sys).front(), 3000, 17).points;
    const double r = sid == "modular-geodesic" ? 0.3 : 0.1;
    const DynamicalCloud cloud(*sys, pts, 1, r);
    for (std::size_t c = 0; c < 40; ++c) {
      const std::vector<StatePoint> center{pts[c * 7]};
      const auto members = cloud.members(center, 1, r);
      std::vector<std::uint32_t> brute;
      for (std::size_t j = 0; j < pts.size(); ++j) {
        if (sys->distance(pts[c * 7], pts[j]) < r) brute.push_back(static_cast<std::uint32_t>(j));
      }
      ++checked;
      if (members != brute) ++mismatched;
    }
  }
  o.check(mismatched == 0, fmt::format("n = 1 balls {} checked, {} differ", checked, mismatched));

  long sums = 0, nonzero = 0;
  const Potential bump = [](const StatePoint& x) { return 1.0 + x[0]; };
  for (const std::string sid : {"identity", "doubling", "cat", "modular-geodesic"}) {
    const auto sys = make_system(sid);
    for (const auto& x : sample_measure(*sys, measure_ids(*sys).front(), 200, 3).points) {
      for (const auto& f : {geometric_potential(*sys), bump}) {
        ++sums;
        if (birkhoff_sum(*sys, f, x, 0) != 0.0) ++nonzero;
      }
    }
  }
  o.check(nonzero == 0, fmt::format("T = 0 sums {} checked, {} nonzero", sums, nonzero));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"Lyapunov oracle", lyapunov_oracle},
      {"Linearized dynamical balls", linearized_balls},
      {"Covering/separated sandwich", covering_sandwich},
      {"Delta monotonicity", delta_monotone},
      {"Entropy chain", entropy_chain},
      {"Gibbs property", gibbs_property},
      {"Ruelle inequality", ruelle_inequality},
      {"Pesin equality", pesin_equality},
      {"Determinism", determinism},
      {"Trivial cases", trivial_cases}};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(number)) continue;
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    failed += o.pass ? 0 : 1;
    fmt::print("{} {:2d} {}: {} ({:.1f} s)\n", o.pass ? "PASS" : "FAIL", number, criteria[i].first, o.detail,
               seconds_since(start));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
