#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ergo/core/errors.hpp"
#include "ergo/core/orbit.hpp"
#include "ergo/models/psl2.hpp"
#include "ergo/models/registry.hpp"
#include "ergo/thermo/thermo.hpp"

using namespace ergo;

namespace {

const double kCatExponent = std::log((3.0 + std::sqrt(5.0)) / 2.0);

std::vector<int> ns(int lo, int hi) {
  std::vector<int> out;
  for (int n = lo; n <= hi; ++n) out.push_back(n);
  return out;
}

// Liouville vectors whose orbit over 0..T stays below y_max and whose chart holds radius r.
std::vector<StatePoint> low_orbit_vectors(const SystemModel& sys, int count, int T, double y_max,
                                          double r, std::uint64_t seed) {
  std::vector<StatePoint> out;
  const auto window = CompactWindow::cusp_cutoff(y_max);
  for (const auto& v : sample_measure(sys, "liouville", 5000, seed).points) {
    if (sys.chart_radius(v) < r) continue;
    const auto orbit = iterate(sys, v, T + 1);
    bool inside = true;
    for (const auto& s : orbit.states) inside = inside && sys.in_window(s, window);
    if (!inside) continue;
    out.push_back(v);
    if (static_cast<int>(out.size()) == count) break;
  }
  return out;
}

}  // namespace

TEST(Birkhoff, SingleTermAndEmptySum) {
  auto sys = make_system("modular-geodesic");
  const auto f = geometric_potential(*sys);
  const StatePoint v{0.1, 1.3, 0.7};
  EXPECT_EQ(birkhoff_average(*sys, f, v, 1), -1.0);
  EXPECT_EQ(birkhoff_sum(*sys, f, v, 0), 0.0);
  EXPECT_THROW(birkhoff_average(*sys, f, v, 0), DomainError);
  EXPECT_THROW(birkhoff_sum(*sys, f, v, -1), DomainError);
}

TEST(Birkhoff, GeometricPotentialIsMinusOne) {
  auto sys = make_system("modular-geodesic");
  const auto f = geometric_potential(*sys);
  for (const auto& v : sample_measure(*sys, "liouville", 5, 3).points) {
    for (int T : {1, 7, 100}) {
      EXPECT_EQ(birkhoff_average(*sys, f, v, T), -1.0);
    }
  }
}

TEST(Birkhoff, FlatModels) {
  auto doubling = make_system("doubling");
  EXPECT_NEAR(birkhoff_average(*doubling, geometric_potential(*doubling), StatePoint{0.3}, 50),
              -std::numbers::ln2, 1e-15);
  auto cat = make_system("cat");
  EXPECT_NEAR(birkhoff_average(*cat, geometric_potential(*cat), StatePoint{0.3, 0.6}, 50), -kCatExponent,
              1e-12);
  auto identity = make_system("identity");
  EXPECT_EQ(birkhoff_sum(*identity, geometric_potential(*identity), StatePoint{0.3}, 9), 0.0);
}

TEST(Birkhoff, WindowIndicatorMatchesLiouvilleMass) {
  auto sys = make_system("modular-geodesic");
  const auto window = CompactWindow::cusp_cutoff(8);
  const Potential indicator = [&](const StatePoint& x) { return sys->in_window(x, window) ? 1.0 : 0.0; };
  const double expected = psl2::liouville_window_mass(8);
  EXPECT_NEAR(expected, 1.0 - 3.0 / (8.0 * std::numbers::pi), 1e-12);
  const auto v = sample_measure(*sys, "liouville", 1, 5).points[0];
  EXPECT_NEAR(birkhoff_average(*sys, indicator, v, 10000), expected, 0.02 * expected);
}

TEST(Birkhoff, DivergenceCarriesIndex) {
  auto sys = make_system("modular-geodesic");
  const StatePoint up{0.0, 2.5, std::numbers::pi / 2};
  try {
    birkhoff_sum(*sys, geometric_potential(*sys), up, 40);
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_GT(e.index(), 5);
    EXPECT_LT(e.index(), 40);
  }
}

TEST(Gibbs, ZeroRowIsMetricBallVolume) {
  auto sys = make_system("modular-geodesic");
  const StatePoint v{0.1, 1.3, 0.7};
  const std::vector<int> Ts{0, 1, 2};
  GibbsOptions options;
  options.n_samples = 20000;
  const auto g = gibbs_check(*sys, v, 0.3, Ts, options);
  ASSERT_EQ(g.rows.front().T, 0);
  EXPECT_EQ(g.rows.front().birkhoff_sum, 0.0);
  EXPECT_DOUBLE_EQ(g.rows.front().ratio, std::log(sys->ref_volume_of_ball(v, 0.3)));
  EXPECT_EQ(g.rows[2].birkhoff_sum, -2.0);
}

TEST(Gibbs, MeasureModeBoundedRatios) {
  auto sys = make_system("modular-geodesic");
  const DynamicalCloud cloud(*sys, sample_measure(*sys, "liouville", 200000, 7).points, 5, 0.3);
  GibbsOptions options;
  options.mode = GibbsMode::Measure;
  options.window = CompactWindow::cusp_cutoff(2);
  const auto Ts = ns(0, 4);
  const auto vs = low_orbit_vectors(*sys, 5, 4, 2.0, 0.3, 8);
  ASSERT_EQ(vs.size(), 5u);
  for (const auto& v : vs) {
    const auto g = gibbs_check(*sys, v, 0.3, Ts, options, &cloud);
    EXPECT_TRUE(g.excluded_T.empty());
    for (const auto& row : g.rows) EXPECT_LE(std::abs(row.ratio - g.rows[1].ratio), 1.5);
    EXPECT_TRUE(g.passes);
    EXPECT_LE(g.ratio_spread, 1.5);
  }
}

TEST(Gibbs, VolumeModeSlope) {
  auto sys = make_system("modular-geodesic");
  GibbsOptions options;
  options.window = CompactWindow::cusp_cutoff(2);
  options.n_samples = 300000;
  options.seed = 4;
  const auto Ts = ns(0, 8);
  for (const auto& v : low_orbit_vectors(*sys, 3, 8, 2.0, 0.3, 9)) {
    const auto g = gibbs_check(*sys, v, 0.3, Ts, options);
    EXPECT_LE(g.ratio_spread, 1.5);
    EXPECT_GE(g.slope, -1.2);
    EXPECT_LE(g.slope, -0.85);
  }
}

TEST(Gibbs, RadiusChangeShiftsRatios) {
  auto sys = make_system("modular-geodesic");
  GibbsOptions options;
  options.window = CompactWindow::cusp_cutoff(1.25);
  options.n_samples = 200000;
  options.seed = 5;
  const auto Ts = ns(0, 6);
  const auto vs = low_orbit_vectors(*sys, 1, 6, 1.25, 0.4, 10);
  ASSERT_EQ(vs.size(), 1u);
  const auto small = gibbs_check(*sys, vs[0], 0.2, Ts, options);
  const auto large = gibbs_check(*sys, vs[0], 0.4, Ts, options);
  ASSERT_EQ(small.rows.size(), large.rows.size());
  double lo = 1e9, hi = -1e9;
  for (std::size_t i = 0; i < small.rows.size(); ++i) {
    if (!small.rows[i].resolved || !large.rows[i].resolved) continue;
    const double shift = large.rows[i].ratio - small.rows[i].ratio;
    lo = std::min(lo, shift);
    hi = std::max(hi, shift);
  }
  EXPECT_GT(lo, 0.0);  // larger balls
  EXPECT_LE(hi - lo, options.log_c_max);
}

TEST(Gibbs, SpreadStableAsWindowGrows) {
  auto sys = make_system("modular-geodesic");
  const auto vs = low_orbit_vectors(*sys, 1, 6, 2.0, 0.3, 11);
  ASSERT_EQ(vs.size(), 1u);
  const auto Ts = ns(0, 6);
  double prev = std::numeric_limits<double>::infinity();
  for (double y_max : {2.0, 4.0, 8.0}) {
    GibbsOptions options;
    options.window = CompactWindow::cusp_cutoff(y_max);
    options.n_samples = 50000;
    options.seed = 1;
    const auto g = gibbs_check(*sys, vs[0], 0.3, Ts, options);
    EXPECT_TRUE(g.excluded_T.empty());
    EXPECT_LE(g.ratio_spread, prev);
    prev = g.ratio_spread;
  }
}

TEST(Gibbs, Errors) {
  auto sys = make_system("modular-geodesic");
  GibbsOptions options;
  options.window = CompactWindow::cusp_cutoff(3);
  options.n_samples = 2000;
  const std::vector<int> Ts{0, 1, 2};
  EXPECT_THROW(gibbs_check(*sys, StatePoint{0.1, 5.0, 0.3}, 0.1, Ts, options), DomainError);
  const std::vector<int> down{2, 1};
  EXPECT_THROW(gibbs_check(*sys, StatePoint{0.1, 1.3, 0.7}, 0.1, down, options), DomainError);
  const StatePoint up{0.0, 2.5, std::numbers::pi / 2};
  const std::vector<int> late{2, 3, 4};
  EXPECT_THROW(gibbs_check(*sys, up, 0.1, late, options), UnresolvedError);
  options.mode = GibbsMode::Measure;
  EXPECT_THROW(gibbs_check(*sys, StatePoint{0.1, 1.3, 0.7}, 0.1, Ts, options), DomainError);
}

namespace {

ReportConfig flat_config(int n_max) {
  ReportConfig c;
  c.seed = 42;
  c.katok_r = {0.05};
  c.katok_n = ns(1, n_max);
  c.bk_r = {0.05};
  c.bk_n = ns(1, n_max);
  c.riemannian_r = {0.05};
  c.riemannian_n = ns(1, n_max);
  c.riemannian_samples = 200000;
  c.lyapunov_steps = 2000;
  return c;
}

}  // namespace

TEST(Ruelle, Doubling) {
  auto sys = make_system("doubling");
  const auto report = ruelle_report(*sys, sample_measure(*sys, "lebesgue", 50000, 1), flat_config(10));
  ASSERT_TRUE(report.complete);
  EXPECT_EQ(report.best_method, "katok-delta");
  EXPECT_NEAR(report.chi_plus, std::numbers::ln2, 1e-12);
  EXPECT_TRUE(report.ruelle_holds);
  const auto pesin = pesin_check(report);
  EXPECT_EQ(pesin.tolerance, 0.1);
  EXPECT_LE(pesin.gap, 0.07);
  EXPECT_NEAR(report.pressure, report.h_best - std::numbers::ln2, 1e-12);
}

TEST(Ruelle, Cat) {
  auto sys = make_system("cat");
  const auto report = ruelle_report(*sys, sample_measure(*sys, "lebesgue", 50000, 2), flat_config(6));
  ASSERT_TRUE(report.complete);
  EXPECT_NEAR(report.chi_plus, kCatExponent, 1e-3);
  EXPECT_NEAR(report.h_best, kCatExponent, 0.1 * kCatExponent);
  EXPECT_GE(report.slack, -0.1);
  EXPECT_TRUE(pesin_check(report).passes);
}

TEST(Ruelle, Identity) {
  auto sys = make_system("identity");
  const auto report = ruelle_report(*sys, sample_measure(*sys, "lebesgue", 5000, 3), flat_config(6));
  ASSERT_TRUE(report.complete);
  for (const auto& [method, est] : report.h_estimates) EXPECT_NEAR(est.value, 0.0, 1e-12) << method;
  EXPECT_EQ(report.chi_plus, 0.0);
  EXPECT_EQ(report.pressure, 0.0);
}

TEST(Ruelle, PeriodicOrbitMeasure) {
  auto sys = make_system("modular-geodesic");
  ReportConfig c;
  c.seed = 7;
  c.katok_r = {0.2};
  c.katok_n = ns(1, 6);
  c.bk_r = {0.2};
  c.bk_n = ns(1, 6);
  c.riemannian_r = {0.2};
  c.riemannian_n = ns(1, 6);
  c.riemannian_samples = 20000;
  c.window = CompactWindow::cusp_cutoff(8);
  c.lyapunov_steps = 2000;
  const auto report = ruelle_report(*sys, sample_measure(*sys, "periodic-orbit", 2000, 7), c);
  ASSERT_TRUE(report.complete);
  EXPECT_NEAR(report.h_best, 0.0, 0.05);
  EXPECT_NEAR(report.chi_plus, 1.0, 1e-6);
  EXPECT_GE(report.slack, 0.8);
  EXPECT_NEAR(report.pressure, -1.0, 0.05);
  EXPECT_FALSE(report.pesin_gap.has_value());
  EXPECT_THROW(pesin_check(report), DomainError);
}

TEST(Ruelle, ModularPressureIdentity) {
  auto sys = make_system("modular-geodesic");
  ReportConfig c;
  c.seed = 8;
  c.katok_r = {0.3};
  c.katok_n = ns(1, 5);
  c.bk_r = {0.3};
  c.bk_n = ns(1, 5);
  c.panel_size = 10;
  c.riemannian_r = {0.2};
  c.riemannian_n = ns(1, 8);
  c.riemannian_samples = 50000;
  c.window = CompactWindow::cusp_cutoff(8);
  c.lyapunov_steps = 2000;
  const auto report = ruelle_report(*sys, sample_measure(*sys, "liouville", 100000, 8), c);
  ASSERT_TRUE(report.complete);
  EXPECT_FALSE(report.h_estimates.at("katok-delta").resolved);
  EXPECT_EQ(report.best_method, "riemannian-local");
  EXPECT_EQ(report.potential_integral, -1.0);
  ASSERT_TRUE(report.pesin_gap.has_value());
  EXPECT_NEAR(std::abs(report.pressure), *report.pesin_gap, 1e-6);
  EXPECT_EQ(default_pesin_tolerance(report.system_id), 0.15);
}

TEST(Ruelle, PartialReportRefusesPesin) {
  RuelleReport report;
  report.system_id = "cat";
  report.measure_id = "lebesgue";
  report.complete = false;
  EXPECT_THROW(pesin_check(report), UnresolvedError);
}
