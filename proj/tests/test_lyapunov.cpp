#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numbers>

#include "ergo/core/errors.hpp"
#include "ergo/core/orbit.hpp"
#include "ergo/core/volume.hpp"
#include "ergo/lyapunov/lyapunov.hpp"
#include "ergo/models/flat.hpp"
#include "ergo/models/modular.hpp"
#include "ergo/models/psl2.hpp"
#include "oracles.hpp"

using namespace ergo;

namespace {

const double kCatExponent = std::log((3.0 + std::sqrt(5.0)) / 2.0);

StatePoint generic_modular_point() { return psl2::to_state(psl2::liouville_sample(1, 2024)[0]); }

std::vector<Eigen::Matrix2d> to_2d(const std::vector<Mat>& products) {
  std::vector<Eigen::Matrix2d> out;
  for (const auto& p : products) out.push_back(p);
  return out;
}

// vol{v in R^3 : |v| < r, v1^2 + e^{2m} v2^2 + e^{-2m} v3^2 < r^2} by midpoint quadrature in (v2, v3).
double modular_tangent_volume(int n, double r) {
  const double m = n - 1;
  const double a = std::exp(m), b = std::exp(-m);
  const int grid = 1500;
  const double h2 = 2 * r / a / grid, h3 = 2 * r / grid;
  double sum = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double v2 = -r / a + (i + 0.5) * h2;
    for (int j = 0; j < grid; ++j) {
      const double v3 = -r + (j + 0.5) * h3;
      const double q = std::max(v2 * v2 + v3 * v3, a * a * v2 * v2 + b * b * v3 * v3);
      if (q < r * r) sum += 2.0 * std::sqrt(r * r - q);
    }
  }
  return sum * h2 * h3;
}

}  // namespace

TEST(QrSpectrum, IdentityIsZero) {
  auto sys = identity_system();
  const auto spec = qr_spectrum(*sys, StatePoint{0.3}, 200, 1);
  ASSERT_EQ(spec.exponents.size(), 1u);
  EXPECT_EQ(spec.exponents[0].value, 0.0);
  EXPECT_EQ(chi_plus(spec), 0.0);
}

TEST(QrSpectrum, CatMap) {
  auto sys = cat_system();
  const auto t0 = std::chrono::steady_clock::now();
  const auto spec = qr_spectrum(*sys, StatePoint{0.123, 0.456}, 10000, 7);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(secs, 1.0);
  ASSERT_EQ(spec.exponents.size(), 2u);
  EXPECT_NEAR(spec.exponents[0].value, kCatExponent, 1e-3);
  EXPECT_NEAR(spec.exponents[1].value, -kCatExponent, 1e-3);
  EXPECT_EQ(spec.exponents[0].multiplicity, 1);
  EXPECT_NEAR(spec.raw[0] + spec.raw[1], 0.0, 1e-6);
  EXPECT_NEAR(chi_plus(spec), kCatExponent, 1e-3);
  EXPECT_LT(spec.residual, 1e-3);
}

TEST(QrSpectrum, DoublingMap) {
  auto sys = doubling_system();
  const auto spec = qr_spectrum(*sys, StatePoint{0.1}, 1000, 3);
  EXPECT_NEAR(spec.exponents[0].value, std::log(2.0), 1e-12);
}

TEST(QrSpectrum, ModularFrameCocycle) {
  auto sys = modular_system();
  const auto spec = qr_spectrum(*sys, generic_modular_point(), 10000, 11);
  ASSERT_EQ(spec.exponents.size(), 3u);
  EXPECT_NEAR(spec.exponents[0].value, 1.0, 1e-6);
  EXPECT_NEAR(spec.exponents[1].value, 0.0, 1e-6);
  EXPECT_NEAR(spec.exponents[2].value, -1.0, 1e-6);
  EXPECT_NEAR(spec.raw[0] + spec.raw[1] + spec.raw[2], 0.0, 1e-6);
  EXPECT_NEAR(chi_plus(spec), 1.0, 1e-6);
}

TEST(QrSpectrum, OrbitInvariance) {
  auto sys = cat_system();
  const StatePoint x{0.71, 0.05};
  const auto later = iterate(*sys, x, 40).states.back();
  const auto a = qr_spectrum(*sys, x, 5000, 1);
  const auto b = qr_spectrum(*sys, later, 5000, 2);
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(a.raw[i], b.raw[i], 2e-3);
}

TEST(QrSpectrum, Preconditions) {
  auto sys = cat_system();
  EXPECT_THROW(qr_spectrum(*sys, StatePoint{0.1, 0.1}, 99, 1), DomainError);
  auto singular = std::make_unique<TorusEndomorphism>("flat", Mat::Zero(1, 1), 0.0);
  try {
    qr_spectrum(*singular, StatePoint{0.1}, 100, 1);
    FAIL();
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.index(), 0);
  }
}

TEST(QrSpectrum, CuspDivergenceCarriesIndex) {
  auto sys = modular_system();
  try {
    qr_spectrum(*sys, StatePoint{0.0, 1.0, std::numbers::pi / 2}, 100, 1);
    FAIL();
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.index(), 14);
  }
}

TEST(ChiPlus, ClusterMultiplicity) {
  LyapunovSpectrum spec;
  spec.exponents = {{0.5, 2}, {-1.0, 1}};
  EXPECT_DOUBLE_EQ(chi_plus(spec), 1.0);
  spec.exponents = {{-0.1, 3}};
  EXPECT_EQ(chi_plus(spec), 0.0);
}

TEST(OseledecAngle, ConstantCocycles) {
  auto cat = cat_system();
  // eigenvectors of a symmetric matrix are orthogonal
  EXPECT_NEAR(constant_cocycle_min_angle(*cat, StatePoint{0.2, 0.4}), std::numbers::pi / 2, 1e-12);
  auto mod = modular_system();
  EXPECT_NEAR(constant_cocycle_min_angle(*mod, generic_modular_point()), std::numbers::pi / 2, 1e-12);
}

TEST(TangentBall, SingleStepIsDisk) {
  const auto ball = make_tangent_ball({Mat::Identity(2, 2) * 3.0}, 0.1);
  const auto exact = tangent_ball_volume(ball, VolumeMethod::ExactOracle, 0, 0);
  EXPECT_NEAR(exact.mean, std::numbers::pi * 0.01, 1e-7);
  const auto mc = tangent_ball_volume(ball, VolumeMethod::MonteCarlo, 100000, 3);
  EXPECT_NEAR(mc.mean, std::numbers::pi * 0.01, 3 * mc.std_err);
}

TEST(TangentBall, DiagonalStrip) {
  Mat d(2, 2);
  d << 2, 0, 0, 0.5;
  const double r = 0.1;
  for (int n : {4, 8, 12, 16}) {
    const auto ball = make_tangent_ball(std::vector<Mat>(n, d), r);
    const double w = r * std::pow(2.0, -(n - 1));
    // disk cut by the strip |v1| < w; the true region is an ellipse of width w, so O(4^{-n}) smaller
    const double strip = 2.0 * (w * std::sqrt(r * r - w * w) + r * r * std::asin(w / r));
    const double polygon = oracle::tangent_ball_area(to_2d(ball.products()), r, 1 << 12);
    EXPECT_LE(polygon, strip);
    EXPECT_NEAR(polygon / strip, 1.0, std::max(std::pow(4.0, -(n - 1)), 1e-6)) << n;
    const auto exact = tangent_ball_volume(ball, VolumeMethod::ExactOracle, 0, 0);
    EXPECT_NEAR(exact.mean / polygon, 1.0, 1e-3) << n;
    const auto mc = tangent_ball_volume(ball, VolumeMethod::MonteCarlo, 200000, n);
    EXPECT_NEAR(mc.mean, polygon, 3 * mc.std_err + 1e-5 * polygon) << n;
  }
  const auto ball = make_tangent_ball(std::vector<Mat>(30, d), r);
  const double rate = -std::log(tangent_ball_volume(ball, VolumeMethod::ExactOracle, 0, 0).mean) / 30;
  EXPECT_NEAR(rate, std::log(2.0), 0.2);
}

TEST(TangentBall, CatMonteCarloMatchesExactAndPolygon) {
  auto sys = cat_system();
  const auto ball = make_tangent_ball(*sys, StatePoint{0.4, 0.9}, 10, 0.1);
  const double polygon = oracle::tangent_ball_area(to_2d(ball.products()), 0.1);
  const auto exact = tangent_ball_volume(ball, VolumeMethod::ExactOracle, 0, 0);
  EXPECT_NEAR(exact.mean / polygon, 1.0, 1e-3);
  const auto mc = tangent_ball_volume(ball, VolumeMethod::MonteCarlo, 400000, 5);
  EXPECT_NEAR(mc.mean, exact.mean, 3 * mc.std_err + 1e-6 * exact.mean);
  EXPECT_FALSE(mc.underresolved);
}

TEST(TangentBall, ModularMatchesQuadrature) {
  auto sys = modular_system();
  for (int n : {1, 4, 9}) {
    const auto ball = make_tangent_ball(*sys, generic_modular_point(), n, 0.1);
    const auto mc = tangent_ball_volume(ball, VolumeMethod::MonteCarlo, 400000, n);
    const double exact = modular_tangent_volume(n, 0.1);
    EXPECT_NEAR(mc.mean, exact, 3 * mc.std_err + 1e-3 * exact) << n;
  }
}

TEST(TangentBall, Monotone) {
  auto sys = cat_system();
  const StatePoint x{0.3, 0.3};
  double prev = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= 8; ++n) {
    const auto small = tangent_ball_volume(make_tangent_ball(*sys, x, n, 0.05), VolumeMethod::MonteCarlo, 50000, n);
    const auto large = tangent_ball_volume(make_tangent_ball(*sys, x, n, 0.1), VolumeMethod::MonteCarlo, 50000, 100 + n);
    EXPECT_LE(small.mean, large.mean + 3 * std::hypot(small.std_err, large.std_err));
    EXPECT_LE(small.mean, prev + 3 * small.std_err);
    prev = small.mean;
  }
}

TEST(TangentBall, Preconditions) {
  EXPECT_THROW(make_tangent_ball({Mat::Identity(2, 2)}, 0.0), DomainError);
  EXPECT_THROW(make_tangent_ball(std::vector<Mat>{}, 0.1), DomainError);
  Mat bad = Mat::Identity(2, 2);
  bad(0, 1) = std::nan("");
  EXPECT_THROW(make_tangent_ball({bad}, 0.1), DomainError);
  const auto ball3 = make_tangent_ball({Mat::Identity(3, 3)}, 0.1);
  EXPECT_THROW(tangent_ball_volume(ball3, VolumeMethod::ExactOracle, 0, 0), DomainError);
}

TEST(LinearizedBall, IdentityIsMetricBall) {
  auto sys = identity_system();
  const auto v = linearized_ball_volume(*sys, StatePoint{0.5}, 5, 0.1, 10000, 1);
  EXPECT_NEAR(v.mean, sys->ref_volume_of_ball(StatePoint{0.5}, 0.1), 1e-12);
}

TEST(LinearizedBall, DoublingMatchesDynamicalBall) {
  auto sys = doubling_system();
  for (int n : {3, 6, 9}) {
    const auto lin = linearized_ball_volume(*sys, StatePoint{0.3}, n, 0.1, 10000, 1);
    EXPECT_NEAR(lin.mean, 0.1 * std::pow(2.0, 2 - n), 1e-12);
    const auto dyn = ball_volume(*sys, StatePoint{0.3}, n, 0.1, 200000, 2);
    EXPECT_NEAR(lin.mean, dyn.mean, 3 * dyn.std_err);
  }
}

TEST(LinearizedBall, CatAgreesWithDynamicalBall) {
  auto sys = cat_system();
  const StatePoint x{0.61, 0.27};
  for (int n = 2; n <= 10; n += 2) {
    const auto lin = linearized_ball_volume(*sys, x, n, 0.05, 100000, n);
    const auto dyn = ball_volume(*sys, x, n, 0.05, 1000000, 50 + n);
    const double ratio = lin.mean / dyn.mean;
    EXPECT_GE(ratio, 0.5) << n;
    EXPECT_LE(ratio, 2.0) << n;
  }
}

TEST(LinearizedBall, ModularUsesChartDensity) {
  auto sys = modular_system();
  const StatePoint x{0.1, 1.2, 1.0};
  ASSERT_GE(sys->chart_radius(x), 0.3);
  const auto lin = linearized_ball_volume(*sys, x, 1, 0.3, 200000, 4);
  // density (sinh s / s)^2 with ball average of s^2 equal to r^2 / 40
  const double ball = 4.0 / 3.0 * std::numbers::pi * 0.027;
  EXPECT_NEAR(lin.mean, ball * (1.0 + 0.09 / 120.0), 3 * lin.std_err + 1e-4 * ball);
  // the exponential image is slightly smaller than the metric ball
  EXPECT_LT(lin.mean, sys->ref_volume_of_ball(x, 0.3));
  EXPECT_THROW(linearized_ball_volume(*sys, x, 1, 0.6, 10000, 1), DomainError);
}

TEST(DecayRate, Identity) {
  auto sys = identity_system();
  const auto rep = decay_rate(*sys, StatePoint{0.2}, 0.1, {2, 4, 6, 8}, 10000, 1);
  // the volume stays 2r, so the rates are -(1/n) log 0.2 -> 0
  for (std::size_t i = 0; i < rep.n.size(); ++i) EXPECT_NEAR(rep.rates[i], -std::log(0.2) / rep.n[i], 1e-12);
  EXPECT_NEAR(rep.slope, 0.0, 1e-12);
  EXPECT_EQ(rep.chi_plus, 0.0);
}

TEST(DecayRate, DoublingExact) {
  auto sys = doubling_system();
  const auto rep = decay_rate(*sys, StatePoint{0.1}, 0.1, {2, 4, 6, 8, 10}, 0, 1, VolumeMethod::ExactOracle);
  EXPECT_NEAR(rep.slope, std::log(2.0), 1e-12);
  EXPECT_NEAR(rep.abs_error, 0.0, 1e-9);
}

TEST(DecayRate, CatSlope) {
  auto sys = cat_system();
  const std::vector<int> n_list{2, 4, 6, 8, 10, 12, 14};
  const auto mc = decay_rate(*sys, StatePoint{0.33, 0.12}, 0.1, n_list, 200000, 9);
  EXPECT_NEAR(mc.slope / kCatExponent, 1.0, 0.05);
  EXPECT_NEAR(mc.chi_plus, kCatExponent, 1e-3);
  const auto exact = decay_rate(*sys, StatePoint{0.33, 0.12}, 0.1, n_list, 0, 9, VolumeMethod::ExactOracle);
  EXPECT_NEAR(exact.slope / kCatExponent, 1.0, 0.05);
  // brute-force polygon volumes give the same slope
  std::vector<double> xs, ys;
  for (int n : {8, 10, 12, 14}) {
    xs.push_back(n);
    ys.push_back(-std::log(oracle::cat_dyn_ball_area(n, 0.1)));
  }
  const double oracle_slope = (ys.back() - ys.front()) / (xs.back() - xs.front());
  EXPECT_NEAR(exact.slope, oracle_slope, 0.02);
}

TEST(DecayRate, ModularSlope) {
  auto sys = modular_system();
  const auto rep = decay_rate(*sys, generic_modular_point(), 0.1, {2, 4, 6, 8, 10, 12}, 200000, 5);
  EXPECT_NEAR(rep.slope, 1.0, 0.05);
  EXPECT_NEAR(rep.chi_plus, 1.0, 1e-6);
  EXPECT_EQ(rep.log_deficit, 0.0);
}

TEST(DecayRate, WindowExcursionsRecordDeficit) {
  auto sys = modular_system();
  const StatePoint high{0.1, 5.0, 0.3};
  const auto rep = decay_rate(*sys, high, 0.05, {2, 4}, 20000, 5, VolumeMethod::MonteCarlo,
                              CompactWindow::cusp_cutoff(2.0));
  EXPECT_FALSE(rep.excursions.empty());
  EXPECT_NEAR(rep.log_deficit, static_cast<double>(rep.excursions.size()), 1e-9);
}

TEST(DecayRate, Preconditions) {
  auto sys = cat_system();
  EXPECT_THROW(decay_rate(*sys, StatePoint{0.1, 0.1}, 0.1, {4}, 10000, 1), DomainError);
  EXPECT_THROW(decay_rate(*sys, StatePoint{0.1, 0.1}, 0.1, {4, 2}, 10000, 1), DomainError);
}

// Volume sandwich: C e^{-n(chi+ + d eps)} <= vol <= C' e^{-n(chi+ - d eps)} with fitted constants.
TEST(Sandwich, HoldsWithFittedConstants) {
  const double eps = 0.1;
  std::vector<std::unique_ptr<SystemModel>> systems;
  systems.push_back(doubling_system());
  systems.push_back(cat_system());
  systems.push_back(modular_system());
  const std::vector<StatePoint> points{StatePoint{0.3}, StatePoint{0.2, 0.7}, generic_modular_point()};
  for (std::size_t s = 0; s < systems.size(); ++s) {
    const auto& sys = *systems[s];
    const int d = sys.dim();
    const auto rep = decay_rate(sys, points[s], 0.1, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12}, 100000, s);
    // constants fit from n = 1; the bounds must then hold across the range
    const double v1 = rep.volumes.front().mean;
    const double lower_c = v1 * std::exp(rep.chi_plus + d * eps) * 0.5;
    const double upper_c = v1 * std::exp(rep.chi_plus - d * eps) * 2.0;
    for (std::size_t i = 0; i < rep.n.size(); ++i) {
      const int n = rep.n[i];
      EXPECT_GE(rep.volumes[i].mean, lower_c * std::exp(-n * (rep.chi_plus + d * eps))) << sys.id() << n;
      EXPECT_LE(rep.volumes[i].mean, upper_c * std::exp(-n * (rep.chi_plus - d * eps))) << sys.id() << n;
    }
  }
}
