#include "ergo/lyapunov/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ergo/core/errors.hpp"
#include "ergo/core/fit.hpp"
#include "ergo/core/orbit.hpp"
#include "ergo/core/parallel.hpp"

namespace ergo {

namespace {

constexpr long kBlockSize = 4096;

// Q factor with R's diagonal made nonnegative; returns log|R_ii| in `logs`.
Mat qr_step(const Mat& z, Vec& logs) {
  Eigen::HouseholderQR<Mat> qr(z);
  Mat q = qr.householderQ();
  const Mat r = qr.matrixQR().template triangularView<Eigen::Upper>();
  logs.resize(z.cols());
  for (Eigen::Index i = 0; i < z.cols(); ++i) {
    if (r(i, i) < 0.0) q.col(i) *= -1.0;
    logs[i] = std::log(std::abs(r(i, i)));
  }
  return q;
}

Mat random_orthogonal(int dim, std::uint64_t seed) {
  Rng rng(seed);
  Mat g(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) g(i, j) = rng.normal();
  }
  Vec unused;
  return qr_step(g, unused);
}

std::vector<double> sorted_desc(const Vec& v) {
  std::vector<double> out(v.data(), v.data() + v.size());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

// Box aligned with the right singular frame of the last product, containing C.
struct TangentBox {
  Mat frame;  // columns: box axes
  Vec half;   // half-widths
  double volume = 0.0;
};

TangentBox bounding_box(const TangentBall& ball, const std::vector<Mat>& products) {
  const int d = ball.dim();
  Eigen::JacobiSVD<Mat> svd(products.back(), Eigen::ComputeFullV);
  TangentBox box;
  box.frame = svd.matrixV();
  box.half = Vec::Constant(d, ball.r);
  for (std::size_t i = 1; i < products.size(); ++i) {
    const Mat& p = products[i];
    if (!(std::abs(p.determinant()) > 1e-300)) {
      throw DomainError("tangent ball: singular cocycle product at step " + std::to_string(i));
    }
    const Mat inv_t = p.inverse().transpose() * box.frame;
    for (int k = 0; k < d; ++k) box.half[k] = std::min(box.half[k], ball.r * inv_t.col(k).norm());
  }
  box.volume = 1.0;
  for (int k = 0; k < d; ++k) box.volume *= 2.0 * box.half[k];
  return box;
}

// Uniform box proposals, weighted acceptance. `weight(v)` is applied to accepted points.
template <class Weight>
VolumeEstimate box_monte_carlo(const TangentBall& ball, const TangentBox& box, long n_samples,
                               std::uint64_t seed, Weight weight) {
  const int d = ball.dim();
  const long n_blocks = (n_samples + kBlockSize - 1) / kBlockSize;
  struct Sums {
    double w = 0.0, w2 = 0.0;
    long accepted = 0;
  };
  std::vector<Sums> blocks(static_cast<std::size_t>(n_blocks));
  parallel_for(static_cast<std::size_t>(n_blocks), [&](std::size_t b) {
    Rng rng(derive_seed(seed, b));
    const long begin = static_cast<long>(b) * kBlockSize;
    const long end = std::min(n_samples, begin + kBlockSize);
    Vec c(d);
    for (long s = begin; s < end; ++s) {
      for (int k = 0; k < d; ++k) c[k] = box.half[k] * (2.0 * rng.uniform() - 1.0);
      const Vec v = box.frame * c;
      if (!ball.contains(v)) continue;
      const double w = weight(v);
      blocks[b].w += w;
      blocks[b].w2 += w * w;
      ++blocks[b].accepted;
    }
  });
  Sums total;
  for (const auto& s : blocks) {
    total.w += s.w;
    total.w2 += s.w2;
    total.accepted += s.accepted;
  }
  const double n = static_cast<double>(n_samples);
  const double mean = total.w / n;
  const double var = std::max(0.0, total.w2 / n - mean * mean);
  VolumeEstimate e;
  e.mean = box.volume * mean;
  e.std_err = box.volume * std::sqrt(var / n);
  e.n_samples = n_samples;
  e.n_accepted = total.accepted;
  e.method = VolumeMethod::MonteCarlo;
  e.underresolved = total.accepted == 0;
  return e;
}

double exact_area_2d(const TangentBall& ball, const std::vector<Mat>& products, const TangentBox& box) {
  // Whitened coordinates: v = M c with the region inside the unit box in c.
  const Mat m = box.frame * box.half.asDiagonal();
  std::vector<Mat> pm;
  pm.reserve(products.size());
  for (const auto& p : products) pm.push_back(p * m);
  auto area_with = [&](long rays) {
    double sum = 0.0;
    for (long k = 0; k < rays; ++k) {
      const double t = 2.0 * std::numbers::pi * (static_cast<double>(k) + 0.5) / static_cast<double>(rays);
      Vec u(2);
      u << std::cos(t), std::sin(t);
      double rho = std::numeric_limits<double>::infinity();
      for (const auto& a : pm) rho = std::min(rho, ball.r / (a * u).norm());
      sum += rho * rho;
    }
    return std::abs(m.determinant()) * 0.5 * sum * (2.0 * std::numbers::pi / static_cast<double>(rays));
  };
  long rays = 1L << 16;
  double prev = area_with(rays);
  for (int refine = 0; refine < 6; ++refine) {
    rays *= 2;
    const double next = area_with(rays);
    if (std::abs(next - prev) <= 1e-3 * next) return next;
    prev = next;
  }
  return prev;
}

}  // namespace

LyapunovSpectrum qr_spectrum(const SystemModel& sys, const StatePoint& x0, long n_steps,
                             std::uint64_t seed, double cluster_tol) {
  if (n_steps < 100) throw DomainError("qr_spectrum: n_steps must be >= 100");
  if (!sys.in_domain(x0)) throw DomainError("qr_spectrum: start point outside the domain");
  const int d = sys.dim();
  Mat q = random_orthogonal(d, seed);
  Vec sums = Vec::Zero(d), half_sums = Vec::Zero(d), logs;
  // The first tenth aligns the frame with the Oseledec flag and is not averaged.
  const long burn = n_steps / 10;
  const long count = n_steps - burn;
  const long half = burn + count / 2;
  StatePoint x = x0;
  for (long k = 0; k < n_steps; ++k) {
    const Mat j = sys.jacobian(x);
    if (!j.allFinite() || std::abs(j.determinant()) < 1e-12) {
      throw DivergenceError("singular jacobian", k);
    }
    q = qr_step(j * q, logs);
    if (k >= burn) sums += logs;
    if (k + 1 == half) half_sums = sums;
    if (k + 1 < n_steps) {
      try {
        x = sys.step(x);
      } catch (const DivergenceError& e) {
        throw e.shifted(k + 1);
      }
    }
  }
  LyapunovSpectrum spec;
  spec.n_steps = n_steps;
  spec.raw = sorted_desc(sums / static_cast<double>(count));
  const auto half_raw = sorted_desc(half_sums / static_cast<double>(half - burn));
  for (int i = 0; i < d; ++i) spec.residual = std::max(spec.residual, std::abs(spec.raw[i] - half_raw[i]));

  // Cluster consecutive exponents closer than the tolerance.
  std::size_t i = 0;
  while (i < spec.raw.size()) {
    std::size_t k = i + 1;
    while (k < spec.raw.size() && spec.raw[k - 1] - spec.raw[k] <= cluster_tol) ++k;
    double mean = 0.0;
    for (std::size_t m = i; m < k; ++m) mean += spec.raw[m];
    spec.exponents.push_back({mean / static_cast<double>(k - i), static_cast<int>(k - i)});
    i = k;
  }
  return spec;
}

double chi_plus(const LyapunovSpectrum& spec) {
  double s = 0.0;
  for (const auto& e : spec.exponents) {
    if (e.value > 0.0) s += e.value * e.multiplicity;
  }
  return s;
}

double constant_cocycle_min_angle(const SystemModel& sys, const StatePoint& x0, int n_check) {
  const OrbitSegment orbit = iterate(sys, x0, n_check);
  const Mat j0 = sys.jacobian(x0);
  for (const auto& s : orbit.states) {
    if ((sys.jacobian(s) - j0).norm() > 1e-12 * j0.norm()) {
      throw DomainError("Oseledec angle: cocycle is not constant along the orbit");
    }
  }
  const int d = sys.dim();
  if (d == 1) return std::numbers::pi / 2.0;
  const Eigen::EigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(j0)};
  double best = std::numbers::pi / 2.0;
  for (int a = 0; a < d; ++a) {
    for (int b = a + 1; b < d; ++b) {
      const double ma = std::abs(es.eigenvalues()[a]), mb = std::abs(es.eigenvalues()[b]);
      if (std::abs(std::log(ma) - std::log(mb)) <= kExponentClusterTol) continue;
      const Eigen::VectorXd va = es.eigenvectors().col(a).real().normalized();
      const Eigen::VectorXd vb = es.eigenvectors().col(b).real().normalized();
      best = std::min(best, std::acos(std::min(1.0, std::abs(va.dot(vb)))));
    }
  }
  return best;
}

std::vector<Mat> TangentBall::products() const {
  std::vector<Mat> p;
  p.reserve(cocycle.size());
  p.push_back(Mat::Identity(dim(), dim()));
  for (std::size_t i = 1; i < cocycle.size(); ++i) p.push_back(cocycle[i - 1] * p.back());
  return p;
}

bool TangentBall::contains(const Vec& v) const {
  const double r2 = r * r;
  Vec w = v;
  for (std::size_t i = 0; i < cocycle.size(); ++i) {
    if (!(w.squaredNorm() < r2)) return false;
    if (i + 1 < cocycle.size()) w = cocycle[i] * w;
  }
  return true;
}

TangentBall make_tangent_ball(std::vector<Mat> cocycle, double r) {
  if (cocycle.empty()) throw DomainError("tangent ball: need n >= 1");
  if (!(r > 0.0)) throw DomainError("tangent ball: r must be positive");
  for (const auto& m : cocycle) {
    if (!m.allFinite()) throw DomainError("tangent ball: non-finite cocycle matrix");
  }
  return {std::move(cocycle), r};
}

TangentBall make_tangent_ball(const SystemModel& sys, const StatePoint& x, int n, double r) {
  const OrbitSegment orbit = iterate(sys, x, n);
  std::vector<Mat> cocycle;
  for (const auto& s : orbit.states) cocycle.push_back(sys.jacobian(s));
  return make_tangent_ball(std::move(cocycle), r);
}

VolumeEstimate tangent_ball_volume(const TangentBall& ball, VolumeMethod method, long n_samples,
                                   std::uint64_t seed) {
  const auto products = ball.products();
  const TangentBox box = bounding_box(ball, products);
  if (method == VolumeMethod::ExactOracle) {
    VolumeEstimate e;
    e.method = VolumeMethod::ExactOracle;
    if (ball.dim() == 1) {
      double len = 2.0 * ball.r;
      for (const auto& p : products) len = std::min(len, 2.0 * ball.r / std::abs(p(0, 0)));
      e.mean = len;
    } else if (ball.dim() == 2) {
      e.mean = exact_area_2d(ball, products, box);
    } else {
      throw DomainError("tangent_ball_volume: the exact oracle needs dim <= 2");
    }
    e.underresolved = !(e.mean > 0.0);
    return e;
  }
  if (n_samples < 1000) throw DomainError("tangent_ball_volume: need at least 1000 samples");
  return box_monte_carlo(ball, box, n_samples, seed, [](const Vec&) { return 1.0; });
}

VolumeEstimate linearized_ball_volume(const SystemModel& sys, const StatePoint& x, int n, double r,
                                      long n_samples, std::uint64_t seed) {
  if (r > sys.chart_radius(x)) throw DomainError("linearized_ball_volume: r exceeds the chart radius");
  if (n_samples < 1000) throw DomainError("linearized_ball_volume: need at least 1000 samples");
  const TangentBall ball = make_tangent_ball(sys, x, n, r);
  const TangentBox box = bounding_box(ball, ball.products());
  return box_monte_carlo(ball, box, n_samples, seed,
                         [&](const Vec& v) { return sys.chart_density(x, v); });
}

DecayReport decay_rate(const SystemModel& sys, const StatePoint& x, double r,
                       const std::vector<int>& n_list, long n_samples, std::uint64_t seed,
                       VolumeMethod method, const CompactWindow& window) {
  if (n_list.size() < 2) throw DomainError("decay_rate: need at least two n values");
  if (!std::is_sorted(n_list.begin(), n_list.end()) || n_list.front() < 1) {
    throw DomainError("decay_rate: n_list must be ascending and positive");
  }
  DecayReport rep;
  rep.n = n_list;
  const int n_max = n_list.back();
  const TangentBall full = make_tangent_ball(sys, x, n_max, r);
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    TangentBall ball = make_tangent_ball(
        std::vector<Mat>(full.cocycle.begin(), full.cocycle.begin() + n_list[i]), r);
    const VolumeEstimate v = tangent_ball_volume(ball, method, n_samples, derive_seed(seed, i));
    if (v.underresolved) {
      throw UnresolvedError("decay_rate: zero accepted samples at n = " + std::to_string(n_list[i]));
    }
    rep.volumes.push_back(v);
    rep.rates.push_back(-std::log(v.mean) / n_list[i]);
  }
  const std::size_t keep = std::max<std::size_t>(2, (n_list.size() + 1) / 2);
  std::vector<double> xs, ys;
  for (std::size_t i = n_list.size() - keep; i < n_list.size(); ++i) {
    xs.push_back(n_list[i]);
    ys.push_back(-std::log(rep.volumes[i].mean));
  }
  rep.slope = least_squares(xs, ys).slope;
  rep.chi_plus = chi_plus(qr_spectrum(sys, x, 1000, derive_seed(seed, 0x5eed)));
  rep.abs_error = std::abs(rep.slope - rep.chi_plus);

  const OrbitSegment orbit = iterate(sys, x, n_max);
  for (int k = 0; k < n_max; ++k) {
    if (sys.in_window(orbit[k], window)) continue;
    rep.excursions.push_back(k);
    const double norm = Eigen::JacobiSVD<Mat>(sys.jacobian(orbit[k])).singularValues()[0];
    rep.log_deficit += std::max(0.0, std::log(norm));
  }
  return rep;
}

}  // namespace ergo
