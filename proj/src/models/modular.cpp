#include "ergo/models/modular.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "ergo/core/errors.hpp"

namespace ergo {

using psl2::Complex;
using psl2::Mat2;

namespace {

const double kSqrt2 = std::sqrt(2.0);
// Bounds relating the metric to basepoint and direction displacement
// (left-invariant, so uniform over the space): d_H(base) <= d and |Δθ| <= √2 d.
// The margins absorb the second-order slack.
constexpr double kBaseFactor = 1.05;
constexpr double kAngleFactor = 1.5;
// The metric ball of radius <= 1/2 lies in the chart ball of radius 1.06 r.
constexpr double kChartEnclosure = 1.06;

// Center images under the candidate set, for point-vs-ball tests.
class ModularBallTest final : public BallTest {
 public:
  ModularBallTest(const StatePoint& center, double r) : r2_(r * r) {
    const Mat2 m = psl2::matrix_from_coords(center[0], center[1], center[2]);
    // A reduced point's marked points sit within d_H(i, marked) of the domain,
    // so images lower than this cannot come within √2 r of them.
    const double reach = std::acosh(std::sqrt(2.0)) + kSqrt2 * r;
    const double min_height = std::sqrt(3.0) / 2.0 * std::exp(-reach);
    for (const Mat2& g : psl2::candidate_set()) {
      const Mat2 gm = g * m;
      Image im{{psl2::mobius(gm, psl2::marked_point(0)), psl2::mobius(gm, psl2::marked_point(1))}, {}};
      if (im.u[0].imag() < min_height || im.u[1].imag() < min_height) continue;
      for (int k = 0; k < 2; ++k) im.log_y[k] = std::log(im.u[k].imag());
      images_.push_back(im);
    }
    log_span_ = kSqrt2 * r;
    sinh_half_ = std::sinh(kSqrt2 * r / 2.0);
  }

  bool contains(const StatePoint& p) const override {
    const Mat2 m = psl2::matrix_from_coords(p[0], p[1], p[2]);
    const Complex w[2] = {psl2::mobius(m, psl2::marked_point(0)),
                          psl2::mobius(m, psl2::marked_point(1))};
    const double lw[2] = {std::log(w[0].imag()), std::log(w[1].imag())};
    for (const Image& im : images_) {
      double j_lo = -std::numeric_limits<double>::infinity();
      double j_hi = std::numeric_limits<double>::infinity();
      bool possible = true;
      for (int k = 0; k < 2 && possible; ++k) {
        const double yu = im.u[k].imag(), yw = w[k].imag();
        if (std::abs(im.log_y[k] - lw[k]) >= log_span_) {
          possible = false;
          break;
        }
        // each marked-point distance is below √2 r: |Δ|^2 < 4 y y' sinh^2(√2 r / 2)
        const double dy = yu - yw;
        const double bound2 = 4.0 * yu * yw * sinh_half_ * sinh_half_ - dy * dy;
        if (bound2 <= 0.0) {
          possible = false;
          break;
        }
        const double dx_max = std::sqrt(bound2);
        const double shift = w[k].real() - im.u[k].real();
        j_lo = std::max(j_lo, std::ceil(shift - dx_max));
        j_hi = std::min(j_hi, std::floor(shift + dx_max));
      }
      if (!possible) continue;
      for (double j = j_lo; j <= j_hi; j += 1.0) {
        double s = 0.0;
        for (int k = 0; k < 2; ++k) {
          const double d = psl2::hyperbolic_distance(w[k], im.u[k] + j);
          s += d * d;
        }
        if (0.5 * s < r2_) return true;
      }
    }
    return false;
  }

 private:
  struct Image {
    Complex u[2];
    double log_y[2];
  };
  std::vector<Image> images_;
  double r2_;
  double log_span_ = 0.0;
  double sinh_half_ = 0.0;
};

// Grid over (x, log y, θ) of reduced basepoints. Neighbourhood queries visit
// the boxes around every lattice image of the center that can reach the domain.
class ModularGrid final : public CellMap {
 public:
  ModularGrid(std::span<const StatePoint> points, double r_max) {
    lmin_ = std::log(std::sqrt(3.0) / 2.0) - 1e-9;
    double lmax = lmin_ + 1.0;
    for (const auto& p : points) lmax = std::max(lmax, std::log(p[1]));
    hx_ = 1.0 / std::max(1, static_cast<int>(std::floor(1.0 / r_max)));
    nx_ = static_cast<int>(std::lround(1.0 / hx_));
    hl_ = r_max;
    nl_ = std::max(1, static_cast<int>(std::ceil((lmax - lmin_) / hl_)) + 1);
    nt_ = std::max(1, static_cast<int>(std::floor(2.0 * std::numbers::pi / (kSqrt2 * r_max))));
    ht_ = 2.0 * std::numbers::pi / nt_;
  }

  std::size_t cell_count() const override { return static_cast<std::size_t>(nx_) * nl_ * nt_; }

  std::size_t cell_of(const StatePoint& p) const override {
    return cell(ix(p[0]), il(std::log(p[1])), it(p[2]));
  }

  void cells_near(const StatePoint& center, double r, std::vector<std::size_t>& out) const override {
    const std::size_t first = out.size();
    // Generation stamps dedupe cells without sorting every visit.
    thread_local std::vector<std::uint32_t> stamp;
    thread_local std::uint32_t generation = 0;
    if (stamp.size() < cell_count()) stamp.assign(cell_count(), 0);
    if (++generation == 0) {
      std::fill(stamp.begin(), stamp.end(), 0);
      generation = 1;
    }
    auto visit = [&](std::size_t c) {
      if (stamp[c] != generation) {
        stamp[c] = generation;
        out.push_back(c);
      }
    };
    const Mat2 m = psl2::matrix_from_coords(center[0], center[1], center[2]);
    const double rb = kBaseFactor * r;
    const double rt = kAngleFactor * r;
    for (const Mat2& g : psl2::candidate_set()) {
      const auto v = psl2::UnitTangentPSL2::from_matrix(g * m);
      const double X = v.z.real(), Y = v.z.imag();
      const double l_lo = std::log(Y) - rb, l_hi = std::log(Y) + rb;
      if (l_hi < lmin_) continue;
      const double hw = Y * std::sinh(rb);
      const int l0 = il(l_lo), l1 = il(l_hi);
      const double j_lo = std::ceil(-0.5 - (X + hw)), j_hi = std::floor(0.5 - (X - hw));
      const int t0 = static_cast<int>(std::floor((v.theta - rt) / ht_));
      const int t1 = static_cast<int>(std::floor((v.theta + rt) / ht_));
      for (double j = j_lo; j <= j_hi; j += 1.0) {
        const int x0 = ix(std::max(-0.5, X + j - hw)), x1 = ix(std::min(0.5, X + j + hw));
        for (int a = x0; a <= x1; ++a) {
          for (int b = l0; b <= l1; ++b) {
            if (t1 - t0 + 1 >= nt_) {
              for (int c = 0; c < nt_; ++c) visit(cell(a, b, c));
            } else {
              for (int c = t0; c <= t1; ++c) visit(cell(a, b, ((c % nt_) + nt_) % nt_));
            }
          }
        }
      }
    }
    std::sort(out.begin() + static_cast<std::ptrdiff_t>(first), out.end());
  }

 private:
  int ix(double x) const { return std::clamp(static_cast<int>(std::floor((x + 0.5) / hx_)), 0, nx_ - 1); }
  int il(double l) const { return std::clamp(static_cast<int>(std::floor((l - lmin_) / hl_)), 0, nl_ - 1); }
  int it(double t) const { return std::clamp(static_cast<int>(std::floor(t / ht_)), 0, nt_ - 1); }
  std::size_t cell(int a, int b, int c) const {
    return (static_cast<std::size_t>(a) * nl_ + static_cast<std::size_t>(b)) * nt_ + static_cast<std::size_t>(c);
  }

  double lmin_ = 0.0, hx_ = 1.0, hl_ = 1.0, ht_ = 1.0;
  int nx_ = 1, nl_ = 1, nt_ = 1;
};

// Radius along the chart ray u (|u| = 1) at which the group norm reaches r.
double radial_extent(const Vec& u, double r) {
  double lo = 0.0, hi = kChartEnclosure * r;
  while (psl2::group_norm(psl2::sl2_exp(psl2::algebra_element(hi * u))) < r) hi *= 1.5;
  for (int i = 0; i < 60 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (psl2::group_norm(psl2::sl2_exp(psl2::algebra_element(mid * u))) < r) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double ball_volume_quadrature(double r) {
  using boost::math::quadrature::gauss;
  constexpr int kAzimuth = 64;
  const double two_pi = 2.0 * std::numbers::pi;
  auto shell = [&](double cos_polar) {
    const double sin_polar = std::sqrt(std::max(0.0, 1.0 - cos_polar * cos_polar));
    double sum = 0.0;
    for (int a = 0; a < kAzimuth; ++a) {
      const double phi = two_pi * a / kAzimuth;
      Vec u(3);
      u << sin_polar * std::cos(phi), sin_polar * std::sin(phi), cos_polar;
      const double R = radial_extent(u, r);
      sum += gauss<double, 20>::integrate(
          [&](double t) { return psl2::exp_chart_density(t * u) * t * t; }, 0.0, R);
    }
    return sum * two_pi / kAzimuth;
  };
  return gauss<double, 30>::integrate(shell, -1.0, 1.0);
}

}  // namespace

double modular_group_ball_volume(double r) {
  if (!(r > 0.0) || r > 0.5) throw DomainError("modular ball volume: r must lie in (0, 1/2]");
  static std::mutex mutex;
  static std::map<double, double> cache;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(r); it != cache.end()) return it->second;
  }
  const double v = ball_volume_quadrature(r);
  std::lock_guard lock(mutex);
  cache.emplace(r, v);
  return v;
}

double modular_haar_per_liouville() { return kSqrt2; }

StatePoint ModularGeodesicSystem::step(const StatePoint& x) const {
  return psl2::to_state(psl2::geodesic_time1(psl2::from_state(x)));
}

double ModularGeodesicSystem::distance(const StatePoint& a, const StatePoint& b) const {
  return psl2::sasaki_distance(psl2::from_state(a), psl2::from_state(b));
}

Mat ModularGeodesicSystem::jacobian(const StatePoint& x) const {
  return psl2::tangent_cocycle(psl2::from_state(x));
}

StatePoint ModularGeodesicSystem::chart_exp(const StatePoint& center, const Vec& v) const {
  const auto c = psl2::from_state(center);
  return psl2::to_state(psl2::reduce(c.m * psl2::sl2_exp(psl2::algebra_element(v))));
}

Vec ModularGeodesicSystem::chart_log(const StatePoint& center, const StatePoint& p) const {
  const auto c = psl2::from_state(center);
  const auto q = psl2::from_state(p);
  const Mat2 g = psl2::nearest_translate(c, q);
  return psl2::algebra_coords(psl2::sl2_log(c.m.inverse() * g * q.m));
}

double ModularGeodesicSystem::chart_density(const StatePoint&, const Vec& v) const {
  return psl2::exp_chart_density(v);
}

double ModularGeodesicSystem::chart_radius(const StatePoint& center) const {
  const Mat2 m = psl2::from_state(center).m;
  double best = 1.0;
  for (const Mat2& g : psl2::candidate_set()) {
    for (int j = -2; j <= 2; ++j) {
      Mat2 t;
      t << 1.0, j, 0.0, 1.0;
      const Mat2 h = t * g;
      if ((h - Mat2::Identity()).norm() < 1e-12 || (h + Mat2::Identity()).norm() < 1e-12) continue;
      best = std::min(best, psl2::group_distance(h * m, m));
    }
  }
  return std::min(0.5, 0.5 * best);
}

ChartSample ModularGeodesicSystem::chart_sample(const StatePoint& center, double radius,
                                                Rng& rng) const {
  const auto c = psl2::from_state(center);
  for (;;) {
    const Vec w = uniform_in_ball(3, kChartEnclosure * radius, rng);
    const Mat2 k = psl2::sl2_exp(psl2::algebra_element(w));
    if (psl2::group_norm(k) >= radius) continue;
    return {psl2::to_state(psl2::reduce(c.m * k)), psl2::exp_chart_density(w)};
  }
}

double ModularGeodesicSystem::ref_volume_of_ball(const StatePoint&, double radius) const {
  return modular_group_ball_volume(radius);
}

double ModularGeodesicSystem::total_volume() const {
  return modular_haar_per_liouville() * psl2::liouville_total();
}

bool ModularGeodesicSystem::in_domain(const StatePoint& x) const {
  if (x.dim() != 3 || !x.finite() || !(x[1] > 0.0)) return false;
  return psl2::is_reduced(Complex(x[0], x[1])) && x[2] >= 0.0 && x[2] < 2.0 * std::numbers::pi;
}

bool ModularGeodesicSystem::in_window(const StatePoint& x, const CompactWindow& window) const {
  return !window.bounded() || x[1] <= *window.y_max;
}

std::unique_ptr<BallTest> ModularGeodesicSystem::ball_test(const StatePoint& center, double r) const {
  return std::make_unique<ModularBallTest>(center, r);
}

std::unique_ptr<CellMap> ModularGeodesicSystem::make_cell_map(std::span<const StatePoint> points,
                                                              double r_max) const {
  return std::make_unique<ModularGrid>(points, r_max);
}

std::unique_ptr<SystemModel> modular_system() { return std::make_unique<ModularGeodesicSystem>(); }

}  // namespace ergo
