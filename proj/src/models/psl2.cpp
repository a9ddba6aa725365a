#include "ergo/models/psl2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ergo/core/errors.hpp"

namespace ergo::psl2 {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const double kSqrt2 = std::sqrt(2.0);

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a = 0.0;
  return a;
}

Mat2 mat(double a, double b, double c, double d) {
  Mat2 m;
  m << a, b, c, d;
  return m;
}

// Squared metric between the marked-point images {a_k} (fixed) and {u_k}
// translated by j.
double pair_distance2(const Complex a[2], const Complex u[2], double j) {
  double s = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double d = hyperbolic_distance(a[k], u[k] + j);
    s += d * d;
  }
  return 0.5 * s;
}

struct Best {
  double d2 = std::numeric_limits<double>::infinity();
  Mat2 gamma = Mat2::Identity();
};

// min over γ in the candidate set and horizontal shifts T^j of d(T^j γ m2, m1)^2.
Best directed(const Mat2& m1, const Mat2& m2) {
  const Complex a[2] = {mobius(m1, marked_point(0)), mobius(m1, marked_point(1))};
  const Complex w[2] = {mobius(m2, marked_point(0)), mobius(m2, marked_point(1))};
  Best best;
  for (const Mat2& g : candidate_set()) {
    const Complex u[2] = {mobius(g, w[0]), mobius(g, w[1])};
    // d_H(z, w) >= |log(Im z / Im w)|, independent of horizontal shifts
    const double l0 = std::log(u[0].imag() / a[0].imag());
    const double l1 = std::log(u[1].imag() / a[1].imag());
    if (0.5 * (l0 * l0 + l1 * l1) >= best.d2) continue;
    const double s0 = a[0].real() - u[0].real();
    const double s1 = a[1].real() - u[1].real();
    // Each term is increasing in |shift - s_k|, so the optimum lies between.
    const double lo = std::floor(std::min(s0, s1));
    const double hi = std::ceil(std::max(s0, s1));
    for (double j = lo; j <= hi; j += 1.0) {
      const double d2 = pair_distance2(a, u, j);
      if (d2 < best.d2) {
        best.d2 = d2;
        best.gamma = mat(1.0, j, 0.0, 1.0) * g;
      }
    }
  }
  return best;
}

}  // namespace

Complex mobius(const Mat2& m, Complex z) {
  return (m(0, 0) * z + m(0, 1)) / (m(1, 0) * z + m(1, 1));
}

Mat2 normalize(const Mat2& m) {
  const double det = m.determinant();
  if (!(det > 0.0) || !std::isfinite(det)) throw DivergenceError("matrix lost positive determinant", 0);
  Mat2 out = m / std::sqrt(det);
  // first nonzero entry in the order a, b, c, d
  const double first = out(0, 0) != 0.0   ? out(0, 0)
                       : out(0, 1) != 0.0 ? out(0, 1)
                       : out(1, 0) != 0.0 ? out(1, 0)
                                          : out(1, 1);
  if (first < 0.0) out = -out;
  return out;
}

UnitTangentPSL2 UnitTangentPSL2::from_matrix(const Mat2& m) {
  UnitTangentPSL2 v;
  v.m = normalize(m);
  const double c = v.m(1, 0), d = v.m(1, 1);
  const double n2 = c * c + d * d;
  v.z = Complex((v.m(0, 0) * c + v.m(0, 1) * d) / n2, 1.0 / n2);
  v.theta = wrap_angle(std::numbers::pi / 2.0 - 2.0 * std::atan2(c, d));
  return v;
}

Mat2 matrix_from_coords(double x, double y, double theta) {
  if (!(y > 0.0)) throw DomainError("basepoint must lie in the upper half-plane");
  const double phi = std::numbers::pi / 4.0 - theta / 2.0;
  const double cs = std::cos(phi), sn = std::sin(phi);
  const double sy = std::sqrt(y);
  // n_x · a_y · k_phi
  return mat(1.0, x, 0.0, 1.0) * mat(sy, 0.0, 0.0, 1.0 / sy) * mat(cs, -sn, sn, cs);
}

UnitTangentPSL2 from_coords(double x, double y, double theta) {
  return UnitTangentPSL2::from_matrix(matrix_from_coords(x, y, theta));
}

StatePoint to_state(const UnitTangentPSL2& v) { return StatePoint{v.z.real(), v.z.imag(), v.theta}; }

UnitTangentPSL2 from_state(const StatePoint& p) {
  if (p.dim() != 3) throw DomainError("modular state must have 3 coordinates");
  return from_coords(p[0], p[1], p[2]);
}

bool is_reduced(Complex z, double tol) {
  return std::abs(z.real()) <= 0.5 + tol && std::norm(z) >= 1.0 - tol;
}

UnitTangentPSL2 reduce(const Mat2& m_in) {
  if (!m_in.allFinite()) throw DivergenceError("non-finite matrix", 0);
  Mat2 m = normalize(m_in);
  for (int it = 0; it < kReduceCap; ++it) {
    const double c = m(1, 0), d = m(1, 1);
    const double n2 = c * c + d * d;
    const double x = (m(0, 0) * c + m(0, 1) * d) / n2;
    const double k = std::round(x);
    if (k != 0.0) {
      m(0, 0) -= k * c;
      m(0, 1) -= k * d;
    }
    const double a = m(0, 0), b = m(0, 1);
    // |z|^2 = (a^2 + b^2) / (c^2 + d^2) for det 1
    if ((a * a + b * b) < (1.0 - 1e-12) * n2) {
      m = mat(-c, -d, a, b);
      continue;
    }
    return UnitTangentPSL2::from_matrix(m);
  }
  throw DivergenceError("fundamental-domain reduction exceeded the iteration cap", 0);
}

Mat2 flow_matrix(double t) { return mat(std::exp(t / 2.0), 0.0, 0.0, std::exp(-t / 2.0)); }

UnitTangentPSL2 geodesic_flow(const UnitTangentPSL2& v, double t) {
  UnitTangentPSL2 out = reduce(v.m * flow_matrix(t));
  if (!(out.z.imag() <= kCuspAbortHeight)) {
    throw DivergenceError("cusp excursion above height 1e6", 0);
  }
  return out;
}

UnitTangentPSL2 geodesic_time1(const UnitTangentPSL2& v) { return geodesic_flow(v, 1.0); }

Mat2 algebra_element(const Vec& w) {
  const double p = w[0] / (2.0 * kSqrt2);
  return mat(p, w[2] / kSqrt2, w[1] / kSqrt2, -p);
}

Vec algebra_coords(const Mat2& y) {
  Vec w(3);
  w << 2.0 * kSqrt2 * 0.5 * (y(0, 0) - y(1, 1)), kSqrt2 * y(1, 0), kSqrt2 * y(0, 1);
  return w;
}

Mat2 sl2_exp(const Mat2& y) {
  const double p = 0.5 * (y(0, 0) - y(1, 1));
  const Mat2 y0 = mat(p, y(0, 1), y(1, 0), -p);
  const double q = p * p + y(0, 1) * y(1, 0);
  double ch, sh_over_s;
  if (std::abs(q) < 1e-8) {
    ch = 1.0 + q / 2.0 + q * q / 24.0;
    sh_over_s = 1.0 + q / 6.0 + q * q / 120.0;
  } else if (q > 0.0) {
    const double s = std::sqrt(q);
    ch = std::cosh(s);
    sh_over_s = std::sinh(s) / s;
  } else {
    const double s = std::sqrt(-q);
    ch = std::cos(s);
    sh_over_s = std::sin(s) / s;
  }
  return ch * Mat2::Identity() + sh_over_s * y0;
}

Mat2 sl2_log(const Mat2& a_in) {
  const Mat2 a = a_in.trace() < 0.0 ? Mat2(-a_in) : a_in;
  const double p = 0.5 * (a(0, 0) - a(1, 1));
  const Mat2 y0 = mat(p, a(0, 1), a(1, 0), -p);
  // q = sinh^2(s) (hyperbolic) or -sin^2(s) (elliptic), free of cancellation
  const double q = p * p + a(0, 1) * a(1, 0);
  double factor;
  if (std::abs(q) < 1e-8) {
    factor = 1.0 - q / 6.0 + 3.0 * q * q / 40.0;
  } else if (q > 0.0) {
    const double x = std::sqrt(q);
    factor = std::asinh(x) / x;
  } else {
    const double x = std::min(1.0, std::sqrt(-q));
    factor = std::asin(x) / std::sqrt(-q);
  }
  return factor * y0;
}

double exp_chart_density(const Vec& w) {
  const double q = w[0] * w[0] / 8.0 + w[1] * w[2] / 2.0;
  double f;
  if (std::abs(q) < 1e-8) {
    f = 1.0 + q / 6.0 + q * q / 120.0;
  } else if (q > 0.0) {
    const double s = std::sqrt(q);
    f = std::sinh(s) / s;
  } else {
    const double s = std::sqrt(-q);
    f = std::sin(s) / s;
  }
  return f * f;
}

double hyperbolic_distance(Complex z, Complex w) {
  return 2.0 * std::asinh(std::abs(z - w) / (2.0 * std::sqrt(z.imag() * w.imag())));
}

Complex marked_point(int k) {
  const double h = 1.0 / kSqrt2;
  return k == 0 ? Complex(h, h) : Complex(-h, h);
}

double group_distance(const Mat2& g, const Mat2& h) {
  double s = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double d = hyperbolic_distance(mobius(g, marked_point(k)), mobius(h, marked_point(k)));
    s += d * d;
  }
  return std::sqrt(0.5 * s);
}

double group_norm(const Mat2& k) { return group_distance(k, Mat2::Identity()); }

const std::vector<Mat2>& candidate_set() {
  static const std::vector<Mat2> set = [] {
    const Mat2 gens[3] = {mat(0, -1, 1, 0), mat(1, 1, 0, 1), mat(1, -1, 0, 1)};
    std::vector<Mat2> out{Mat2::Identity()};
    auto add = [&](const Mat2& g) {
      const Mat2 n = normalize(g);
      for (const auto& e : out) {
        if (e == n) return false;
      }
      out.push_back(n);
      return true;
    };
    std::vector<Mat2> frontier{Mat2::Identity()};
    for (int len = 1; len <= 3; ++len) {
      std::vector<Mat2> next;
      for (const auto& w : frontier) {
        for (const auto& g : gens) {
          const Mat2 p = w * g;
          if (add(p)) next.push_back(normalize(p));
        }
      }
      frontier = std::move(next);
    }
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i) add(out[i].inverse());
    return out;
  }();
  return set;
}

double sasaki_distance(const UnitTangentPSL2& v1, const UnitTangentPSL2& v2) {
  const double d2 = std::min(directed(v1.m, v2.m).d2, directed(v2.m, v1.m).d2);
  return std::sqrt(d2);
}

Mat2 nearest_translate(const UnitTangentPSL2& v1, const UnitTangentPSL2& v2) {
  return directed(v1.m, v2.m).gamma;
}

UnitTangentPSL2 liouville_draw(Rng& rng, long* proposals) {
  const double y0 = std::sqrt(3.0) / 2.0;
  for (;;) {
    if (proposals) ++*proposals;
    const double x = rng.uniform() - 0.5;
    const double y = y0 / (1.0 - rng.uniform());  // density ∝ 1/y^2 on [y0, ∞)
    if (x * x + y * y < 1.0) continue;
    return from_coords(x, y, kTwoPi * rng.uniform());
  }
}

std::vector<UnitTangentPSL2> liouville_sample(long n, std::uint64_t seed) {
  if (n < 1) throw DomainError("liouville_sample: n must be >= 1");
  Rng rng(seed);
  std::vector<UnitTangentPSL2> out;
  out.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) out.push_back(liouville_draw(rng));
  return out;
}

double liouville_window_mass(double y_max) {
  if (!(y_max > 1.0)) throw DomainError("window height must exceed 1");
  // Above height 1 the domain is the full strip, of area 1/y_max above y_max.
  return 1.0 - (3.0 / std::numbers::pi) / y_max;
}

double liouville_total() { return 2.0 * std::numbers::pi * std::numbers::pi / 3.0; }

double jsu(const UnitTangentPSL2&, double t) {
  if (!(t >= 0.0)) throw DomainError("jsu: t must be >= 0");
  return std::exp(t);
}

double fsu(const UnitTangentPSL2&) { return -1.0; }

Mat tangent_cocycle(const UnitTangentPSL2&) {
  Mat j = Mat::Zero(3, 3);
  j(0, 0) = 1.0;
  j(1, 1) = std::numbers::e;
  j(2, 2) = 1.0 / std::numbers::e;
  return j;
}

Mat2 periodic_generator() { return mat(2, 1, 1, 1); }

Mat2 periodic_base_matrix() {
  const double s5 = std::sqrt(5.0);
  const double lp = (3.0 + s5) / 2.0, lm = (3.0 - s5) / 2.0;
  // columns: expanding eigenvector, contracting eigenvector (sign for det > 0)
  return mat(1.0, -1.0, lp - 2.0, 2.0 - lm) / std::pow(5.0, 0.25);
}

double periodic_length() { return 2.0 * std::acosh(1.5); }

std::vector<UnitTangentPSL2> periodic_orbit_sample(long n) {
  if (n < 1) throw DomainError("periodic_orbit_sample: n must be >= 1");
  const Mat2 m0 = periodic_base_matrix();
  const double ell = periodic_length();
  std::vector<UnitTangentPSL2> out;
  out.reserve(static_cast<std::size_t>(n));
  for (long k = 0; k < n; ++k) {
    out.push_back(reduce(m0 * flow_matrix(ell * static_cast<double>(k) / static_cast<double>(n))));
  }
  return out;
}

}  // namespace ergo::psl2
