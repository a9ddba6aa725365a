#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ergo/core/system.hpp"

namespace ergo {

inline constexpr double kExponentClusterTol = 0.05;

struct LyapunovExponent {
  double value = 0.0;  // per map step
  int multiplicity = 1;
};

struct LyapunovSpectrum {
  std::vector<LyapunovExponent> exponents;  // distinct values, descending
  std::vector<double> raw;                  // all dim() QR exponents, descending
  long n_steps = 0;
  double residual = 0.0;  // max_j |λ_j(n) - λ_j(n/2)|
};

// Benettin QR iteration of the tangent cocycle from a seeded random orthogonal frame.
LyapunovSpectrum qr_spectrum(const SystemModel& sys, const StatePoint& x0, long n_steps,
                             std::uint64_t seed, double cluster_tol = kExponentClusterTol);

// Sum of positive exponents weighted by multiplicity.
double chi_plus(const LyapunovSpectrum& spec);

// Smallest angle (radians) between eigen-directions of distinct modulus, for
// cocycles that are constant along the sampled orbit. Throws DomainError if
// the jacobian varies (general Oseledec splittings are not computed).
double constant_cocycle_min_angle(const SystemModel& sys, const StatePoint& x0, int n_check = 32);

// C(x, n, r) = ∩_{i<n} (d_x f^i)^{-1} B(0, r).
struct TangentBall {
  std::vector<Mat> cocycle;  // d_{f^i x} f for i < n; the last factor is not needed for n
  double r = 0.0;

  int n() const { return static_cast<int>(cocycle.size()); }
  int dim() const { return static_cast<int>(cocycle.front().rows()); }
  // P_0 = I, P_i = d_{f^{i-1}x} f ... d_x f for i < n.
  std::vector<Mat> products() const;
  bool contains(const Vec& v) const;
};

TangentBall make_tangent_ball(const SystemModel& sys, const StatePoint& x, int n, double r);
TangentBall make_tangent_ball(std::vector<Mat> cocycle, double r);

// Monte Carlo (uniform proposals in a bounding box aligned with the singular
// frame of P_{n-1}) or exact (dim <= 2: radial integration of the star-shaped region).
VolumeEstimate tangent_ball_volume(const TangentBall& ball, VolumeMethod method, long n_samples,
                                   std::uint64_t seed);

// Reference volume of exp_x(C(x, n, r)) through the model chart and its density.
VolumeEstimate linearized_ball_volume(const SystemModel& sys, const StatePoint& x, int n, double r,
                                      long n_samples, std::uint64_t seed);

struct DecayReport {
  std::vector<int> n;
  std::vector<VolumeEstimate> volumes;
  std::vector<double> rates;  // -(1/n) log vol
  double slope = 0.0;         // LS slope of -log vol vs n over the largest half of n
  double chi_plus = 0.0;
  double abs_error = 0.0;     // |slope - chi_plus|
  // Σ log+ ||d_{f^k x} f|| over steps k < max n with f^k x outside the window.
  double log_deficit = 0.0;
  std::vector<int> excursions;
};

DecayReport decay_rate(const SystemModel& sys, const StatePoint& x, double r,
                       const std::vector<int>& n_list, long n_samples, std::uint64_t seed,
                       VolumeMethod method = VolumeMethod::MonteCarlo,
                       const CompactWindow& window = CompactWindow::whole_space());

}  // namespace ergo
