#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ergo/core/cloud.hpp"
#include "ergo/core/system.hpp"

namespace ergo {

// Empirical masses below this many cloud points are underresolved.
inline constexpr long kMinBallCount = 50;
// Katok cells whose cover needs more balls than |cloud| / this are saturated.
inline constexpr long kKatokSaturation = 20;
// Riemannian-local cells need this many accepted Monte-Carlo samples.
inline constexpr long kMinAccepted = 50;

enum class EntropyMethod { KatokDelta, BrinKatokLower, BrinKatokUpper, RiemannianLocal };
std::string_view to_string(EntropyMethod m);

// One (r, n) measurement. `raw` is log N̂ for Katok and -log(mass) otherwise.
struct EntropyCell {
  double r = 0.0;
  int n = 0;
  double raw = 0.0;
  double std_err = 0.0;
  long count = 0;  // N̂, points in the ball, or accepted samples
  bool resolved = true;
  bool returning = true;  // T^n x in the window (Riemannian-local only)
  int point = -1;         // panel index for aggregated estimates
};

// Rate fit for one r over the upper half of its resolved n's.
struct RateFit {
  double r = 0.0;
  double slope = 0.0;       // least-squares slope of raw vs n
  double max_secant = 0.0;  // max slope between consecutive fitted n's
  std::vector<int> n_used;
  // Katok only: cloud fraction where r exceeds the chart radius. Above delta
  // the cover counts balls that wrap around the space and the fit is dropped.
  double wrapped = 0.0;
  bool resolved = false;
};

struct EntropyEstimate {
  double value = 0.0;  // nats per step, clamped at 0
  EntropyMethod method = EntropyMethod::KatokDelta;
  double r = 0.0;  // scale the value was read at
  int n_min = 0;
  int n_max = 0;
  std::optional<double> delta;
  std::optional<double> window_y_max;
  std::vector<EntropyCell> cells;
  std::vector<RateFit> fits;
  long sample_size = 0;
  bool resolved = false;
  // Panel aggregates: per-point values (NaN if unresolved); value is their median.
  std::vector<double> panel_values;
};

// Median over the resolved panel points; resolved iff at least half of them are.
EntropyEstimate panel_estimate(EntropyMethod method, std::span<const EntropyEstimate> points);

// Greedy separated set in index order: a point joins iff it is at
// dyn-distance >= r from every chosen point. The result also covers the
// cloud at radius r (maximality). Points whose orbit diverges before n are skipped.
std::vector<std::uint32_t> separated_set(const DynamicalCloud& cloud, int n, double r);
std::vector<std::uint32_t> separated_set(const SystemModel& sys, const std::vector<StatePoint>& points,
                                         int n, double r);

// Size of a greedy (n, r)-cover by dynamical balls at cloud points: first-fit
// centers with redundant balls removed afterwards.
long covering_count(const DynamicalCloud& cloud, int n, double r);
long covering_count(const SystemModel& sys, const std::vector<StatePoint>& points, int n, double r);

// Katok delta-entropy: smallest mass-ordered prefix of the cover holding
// >= (1 - delta) of the cloud, slope of log N̂ in n.
EntropyEstimate katok_entropy(const DynamicalCloud& cloud, double delta, std::span<const double> r_list,
                              std::span<const int> n_list);

struct BrinKatokEstimate {
  EntropyEstimate lower;  // least-squares slope
  EntropyEstimate upper;  // max consecutive secant
};

// Local entropy at x from the empirical masses of B_n(x, r).
BrinKatokEstimate brin_katok_local(const DynamicalCloud& cloud, const StatePoint& x,
                                   std::span<const double> r_list, std::span<const int> n_list);

struct BrinKatokPanel {
  std::vector<BrinKatokEstimate> points;
  EntropyEstimate lower;  // panel aggregates
  EntropyEstimate upper;
  double median_lower = 0.0;
  double median_upper = 0.0;
  double spread_lower = 0.0;  // max - min of lower values (a.e.-constancy check)
  long unresolved = 0;        // panel points with no resolved fit
};

BrinKatokPanel brin_katok_panel(const DynamicalCloud& cloud, std::span<const StatePoint> xs,
                                std::span<const double> r_list, std::span<const int> n_list);

// Slope of -log vol(B_n(x, r)) over the n with T^n x in the window.
// Throws UnresolvedError("orbit escapes window") if no n returns.
EntropyEstimate riemannian_local_entropy(const SystemModel& sys, const StatePoint& x,
                                         const CompactWindow& window, std::span<const double> r_list,
                                         std::span<const int> n_list, long n_samples,
                                         std::uint64_t seed);

// Riemannian-local over a panel of points (point i uses derive_seed(seed, i)).
// Points whose orbit escapes the window count as unresolved.
EntropyEstimate riemannian_local_panel(const SystemModel& sys, std::span<const StatePoint> xs,
                                       const CompactWindow& window, std::span<const double> r_list,
                                       std::span<const int> n_list, long n_samples, std::uint64_t seed);

}  // namespace ergo
