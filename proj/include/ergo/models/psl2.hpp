#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <vector>

#include "ergo/core/rng.hpp"
#include "ergo/core/types.hpp"

// Unit tangent bundle of the modular surface, realized as PSL(2,Z)\PSL(2,R).
// A matrix m represents the unit vector at m·i obtained by pushing forward the
// upward unit vector at i; the geodesic flow is right multiplication by
// diag(e^{t/2}, e^{-t/2}).
namespace ergo::psl2 {

using Mat2 = Eigen::Matrix2d;
using Complex = std::complex<double>;

inline constexpr double kCuspAbortHeight = 1e6;
inline constexpr int kReduceCap = 10000;

struct UnitTangentPSL2 {
  Mat2 m = Mat2::Identity();
  Complex z{0.0, 1.0};  // basepoint m·i
  double theta = 0.0;   // direction angle in [0, 2π), measured from the positive real axis

  // Caches z and theta from m after sign/determinant normalization. Does not reduce.
  static UnitTangentPSL2 from_matrix(const Mat2& m);
};

Complex mobius(const Mat2& m, Complex z);
// Rescales to det 1 and picks the sign with positive first nonzero entry.
Mat2 normalize(const Mat2& m);
Mat2 matrix_from_coords(double x, double y, double theta);
UnitTangentPSL2 from_coords(double x, double y, double theta);
StatePoint to_state(const UnitTangentPSL2& v);
UnitTangentPSL2 from_state(const StatePoint& p);
bool is_reduced(Complex z, double tol = 1e-9);

// γ·m with γ in PSL(2,Z) and γ·m·i in the standard fundamental domain.
UnitTangentPSL2 reduce(const Mat2& m);

Mat2 flow_matrix(double t);  // diag(e^{t/2}, e^{-t/2})
UnitTangentPSL2 geodesic_flow(const UnitTangentPSL2& v, double t);
UnitTangentPSL2 geodesic_time1(const UnitTangentPSL2& v);

// sl(2) in the orthonormal frame (flow, unstable, stable):
// Y(w) = w0·X/√2 + w1·V/√2 + w2·U/√2 with X = diag(1/2,-1/2), U upper and V
// lower nilpotent. Right translation by exp(w1 V) is unstable under the flow.
Mat2 algebra_element(const Vec& w);
Vec algebra_coords(const Mat2& y);
Mat2 sl2_exp(const Mat2& y);
// Principal logarithm of ±a (the sign with nonnegative trace).
Mat2 sl2_log(const Mat2& a);
// Haar density of exponential coordinates relative to the frame volume.
double exp_chart_density(const Vec& w);

// Left-invariant metric on PSL(2,R): root mean square of the hyperbolic
// displacements of two marked points. d(g, h) = group_distance(g^{-1} h).
double hyperbolic_distance(Complex z, Complex w);
double group_distance(const Mat2& g, const Mat2& h);
double group_norm(const Mat2& k);
// Marked points whose displacements define the metric.
Complex marked_point(int k);

// Finite candidate set: reduced words of length <= 3 in S, T, T^{-1}
// (identity first), closed under inversion.
const std::vector<Mat2>& candidate_set();

// Quotient distance: min over the candidate set and horizontal translations.
double sasaki_distance(const UnitTangentPSL2& v1, const UnitTangentPSL2& v2);
// The lattice element achieving the quotient distance (γ with d(γ m2, m1) minimal).
Mat2 nearest_translate(const UnitTangentPSL2& v1, const UnitTangentPSL2& v2);

// Liouville measure (dx dy dθ / y^2, normalized) on the reduced domain by
// rejection from the strip above √3/2. `proposals` counts draws including
// the accepted one.
UnitTangentPSL2 liouville_draw(Rng& rng, long* proposals = nullptr);
std::vector<UnitTangentPSL2> liouville_sample(long n, std::uint64_t seed);
// Liouville probability of {Im z <= y_max}.
double liouville_window_mass(double y_max);
// Liouville volume dx dy dθ / y^2 of the whole space.
double liouville_total();

double jsu(const UnitTangentPSL2& v, double t);
double fsu(const UnitTangentPSL2& v);
// Jacobian of the time-1 map in the (flow, unstable, stable) frame.
Mat tangent_cocycle(const UnitTangentPSL2& v);

// Closed geodesic fixed by the hyperbolic element [[2,1],[1,1]].
Mat2 periodic_generator();
Mat2 periodic_base_matrix();
double periodic_length();
// n vectors at equally spaced times along one period.
std::vector<UnitTangentPSL2> periodic_orbit_sample(long n);

}  // namespace ergo::psl2
