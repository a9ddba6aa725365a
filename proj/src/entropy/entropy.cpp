#include "ergo/entropy/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ergo/core/errors.hpp"
#include "ergo/core/fit.hpp"
#include "ergo/core/orbit.hpp"
#include "ergo/core/parallel.hpp"
#include "ergo/core/rng.hpp"
#include "ergo/core/volume.hpp"

namespace ergo {

std::string_view to_string(EntropyMethod m) {
  switch (m) {
    case EntropyMethod::KatokDelta: return "katok-delta";
    case EntropyMethod::BrinKatokLower: return "brin-katok-lower";
    case EntropyMethod::BrinKatokUpper: return "brin-katok-upper";
    case EntropyMethod::RiemannianLocal: return "riemannian-local";
  }
  return "?";
}

namespace {

void check_grid(std::span<const double> r_list, std::span<const int> n_list) {
  if (r_list.empty()) throw DomainError("r_list is empty");
  for (std::size_t i = 0; i < r_list.size(); ++i) {
    if (!(r_list[i] > 0.0)) throw DomainError("r_list must be positive");
    if (i > 0 && !(r_list[i] < r_list[i - 1])) throw DomainError("r_list must be descending");
  }
  if (n_list.size() < 2) throw DomainError("n_list needs at least two entries");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 1) throw DomainError("n_list must be positive");
    if (i > 0 && !(n_list[i] > n_list[i - 1])) throw DomainError("n_list must be ascending");
  }
}

// Fit raw vs n over the upper half of the usable cells of one r.
RateFit fit_cells(double r, const std::vector<EntropyCell>& cells) {
  RateFit fit;
  fit.r = r;
  std::vector<const EntropyCell*> usable;
  for (const auto& c : cells) {
    if (c.r == r && c.resolved && c.returning) usable.push_back(&c);
  }
  if (usable.size() < 2) return fit;
  const std::size_t keep = std::max<std::size_t>(2, (usable.size() + 1) / 2);
  std::vector<double> xs, ys;
  for (std::size_t i = usable.size() - keep; i < usable.size(); ++i) {
    xs.push_back(usable[i]->n);
    ys.push_back(usable[i]->raw);
    fit.n_used.push_back(usable[i]->n);
  }
  fit.slope = least_squares(xs, ys).slope;
  fit.max_secant = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < xs.size(); ++i) {
    fit.max_secant = std::max(fit.max_secant, (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]));
  }
  fit.resolved = true;
  return fit;
}

// Value at the smallest r with a resolved fit.
void finish(EntropyEstimate& est, std::span<const double> r_list, std::span<const int> n_list,
            bool use_secant, std::span<const double> wrapped = {}, double max_wrapped = 1.0) {
  est.n_min = n_list.front();
  est.n_max = n_list.back();
  for (std::size_t i = 0; i < r_list.size(); ++i) {
    RateFit fit = fit_cells(r_list[i], est.cells);
    if (!wrapped.empty()) {
      fit.wrapped = wrapped[i];
      fit.resolved = fit.resolved && wrapped[i] <= max_wrapped;
    }
    est.fits.push_back(std::move(fit));
  }
  for (auto it = est.fits.rbegin(); it != est.fits.rend(); ++it) {
    if (!it->resolved) continue;
    est.value = std::max(0.0, use_secant ? it->max_secant : it->slope);
    est.r = it->r;
    est.resolved = true;
    return;
  }
}

struct Cover {
  std::vector<std::uint32_t> centers;
  std::vector<std::vector<std::uint32_t>> balls;
  long valid = 0;  // points with a full n-step orbit
};

Cover first_fit(const DynamicalCloud& cloud, int n, double r) {
  Cover cover;
  std::vector<char> covered(cloud.size(), 0);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (cloud.valid_length(i) < n) continue;
    ++cover.valid;
    if (covered[i]) continue;
    auto ball = cloud.members(cloud.orbit(i), n, r);
    for (std::uint32_t j : ball) covered[j] = 1;
    cover.centers.push_back(static_cast<std::uint32_t>(i));
    cover.balls.push_back(std::move(ball));
  }
  return cover;
}

// Drop balls whose points are all covered by other balls (latest first).
Cover prune(Cover cover, std::size_t size) {
  std::vector<int> multiplicity(size, 0);
  for (const auto& b : cover.balls) {
    for (std::uint32_t j : b) ++multiplicity[j];
  }
  std::vector<char> keep(cover.centers.size(), 1);
  for (std::size_t c = cover.centers.size(); c-- > 0;) {
    const auto& b = cover.balls[c];
    if (std::all_of(b.begin(), b.end(), [&](std::uint32_t j) { return multiplicity[j] >= 2; })) {
      keep[c] = 0;
      for (std::uint32_t j : b) --multiplicity[j];
    }
  }
  Cover out;
  out.valid = cover.valid;
  for (std::size_t c = 0; c < cover.centers.size(); ++c) {
    if (!keep[c]) continue;
    out.centers.push_back(cover.centers[c]);
    out.balls.push_back(std::move(cover.balls[c]));
  }
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Smallest mass-ordered prefix of the pruned cover holding >= (1 - delta) of the valid points.
long katok_count(const DynamicalCloud& cloud, int n, double r, double delta) {
  Cover cover = prune(first_fit(cloud, n, r), cloud.size());
  std::vector<std::size_t> order(cover.centers.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cover.balls[a].size() > cover.balls[b].size();
  });
  const long need = static_cast<long>(std::ceil((1.0 - delta) * static_cast<double>(cover.valid)));
  std::vector<char> covered(cloud.size(), 0);
  long have = 0, used = 0;
  for (std::size_t c : order) {
    if (have >= need) break;
    ++used;
    for (std::uint32_t j : cover.balls[c]) {
      if (!covered[j]) {
        covered[j] = 1;
        ++have;
      }
    }
  }
  return used;
}

}  // namespace

std::vector<std::uint32_t> separated_set(const DynamicalCloud& cloud, int n, double r) {
  return first_fit(cloud, n, r).centers;
}

std::vector<std::uint32_t> separated_set(const SystemModel& sys, const std::vector<StatePoint>& points,
                                         int n, double r) {
  const DynamicalCloud cloud(sys, points, n, r);
  return separated_set(cloud, n, r);
}

long covering_count(const DynamicalCloud& cloud, int n, double r) {
  return static_cast<long>(prune(first_fit(cloud, n, r), cloud.size()).centers.size());
}

long covering_count(const SystemModel& sys, const std::vector<StatePoint>& points, int n, double r) {
  const DynamicalCloud cloud(sys, points, n, r);
  return covering_count(cloud, n, r);
}

EntropyEstimate katok_entropy(const DynamicalCloud& cloud, double delta, std::span<const double> r_list,
                              std::span<const int> n_list) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("katok: delta must lie in (0, 1)");
  check_grid(r_list, n_list);
  EntropyEstimate est;
  est.method = EntropyMethod::KatokDelta;
  est.delta = delta;
  est.sample_size = static_cast<long>(cloud.size());
  est.cells.resize(r_list.size() * n_list.size());
  std::vector<double> wrapped(r_list.size(), 0.0);
  long valid = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (cloud.valid_length(i) < 1) continue;
    ++valid;
    const double cr = cloud.system().chart_radius(cloud.point(i));
    for (std::size_t ri = 0; ri < r_list.size(); ++ri) wrapped[ri] += cr < r_list[ri] ? 1.0 : 0.0;
  }
  for (double& w : wrapped) w /= static_cast<double>(std::max<long>(valid, 1));
  // N̂ grows with n, so once a cell saturates the larger n of that r are not
  // computed. Radii that wrap around on more than delta of the mass are skipped.
  parallel_for(r_list.size(), [&](std::size_t ri) {
    const double r = r_list[ri];
    bool saturated = wrapped[ri] > delta;
    for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
      EntropyCell& cell = est.cells[ri * n_list.size() + ni];
      cell.r = r;
      cell.n = n_list[ni];
      if (saturated) {
        cell.resolved = false;
        cell.count = -1;
        cell.raw = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      const long used = katok_count(cloud, cell.n, r, delta);
      cell.count = used;
      cell.raw = std::log(static_cast<double>(std::max<long>(used, 1)));
      cell.resolved = used * kKatokSaturation <= static_cast<long>(cloud.size());
      saturated = !cell.resolved;
    }
  });
  finish(est, r_list, n_list, false, wrapped, delta);
  return est;
}

BrinKatokEstimate brin_katok_local(const DynamicalCloud& cloud, const StatePoint& x,
                                   std::span<const double> r_list, std::span<const int> n_list) {
  check_grid(r_list, n_list);
  const OrbitSegment orbit = iterate(cloud.system(), x, n_list.back());
  EntropyEstimate est;
  est.sample_size = static_cast<long>(cloud.size());
  const double total = static_cast<double>(cloud.size());
  for (double r : r_list) {
    const auto counts = cloud.mass_profile(orbit.states, n_list.back(), r);
    for (int n : n_list) {
      EntropyCell cell;
      cell.r = r;
      cell.n = n;
      cell.count = counts[static_cast<std::size_t>(n - 1)];
      cell.resolved = cell.count >= kMinBallCount;
      if (cell.count > 0) {
        const double p = static_cast<double>(cell.count) / total;
        cell.raw = -std::log(p);
        cell.std_err = std::sqrt((1.0 - p) / static_cast<double>(cell.count));
      } else {
        cell.raw = std::numeric_limits<double>::infinity();
      }
      est.cells.push_back(cell);
    }
  }
  BrinKatokEstimate out{est, est};
  out.lower.method = EntropyMethod::BrinKatokLower;
  out.upper.method = EntropyMethod::BrinKatokUpper;
  finish(out.lower, r_list, n_list, false);
  finish(out.upper, r_list, n_list, true);
  return out;
}

BrinKatokPanel brin_katok_panel(const DynamicalCloud& cloud, std::span<const StatePoint> xs,
                                std::span<const double> r_list, std::span<const int> n_list) {
  check_grid(r_list, n_list);
  BrinKatokPanel panel;
  panel.points.resize(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) {
    try {
      panel.points[i] = brin_katok_local(cloud, xs[i], r_list, n_list);
    } catch (const DivergenceError&) {
      // a panel point lost in the cusp contributes no fit
      panel.points[i] = BrinKatokEstimate{};
    }
  });
  std::vector<double> lows, highs;
  for (const auto& p : panel.points) {
    if (!p.lower.resolved) {
      ++panel.unresolved;
      continue;
    }
    lows.push_back(p.lower.value);
    highs.push_back(p.upper.value);
  }
  std::vector<EntropyEstimate> lo_est, hi_est;
  for (const auto& p : panel.points) {
    lo_est.push_back(p.lower);
    hi_est.push_back(p.upper);
  }
  panel.lower = panel_estimate(EntropyMethod::BrinKatokLower, lo_est);
  panel.upper = panel_estimate(EntropyMethod::BrinKatokUpper, hi_est);
  panel.median_lower = median(lows);
  panel.median_upper = median(highs);
  if (!lows.empty()) {
    const auto [lo, hi] = std::minmax_element(lows.begin(), lows.end());
    panel.spread_lower = *hi - *lo;
  }
  return panel;
}

EntropyEstimate riemannian_local_entropy(const SystemModel& sys, const StatePoint& x,
                                         const CompactWindow& window, std::span<const double> r_list,
                                         std::span<const int> n_list, long n_samples,
                                         std::uint64_t seed) {
  check_grid(r_list, n_list);
  if (!sys.in_window(x, window)) throw DomainError("riemannian-local: x is outside the window");
  const int n_max = n_list.back();
  const OrbitSegment orbit = iterate(sys, x, n_max + 1);
  EntropyEstimate est;
  est.method = EntropyMethod::RiemannianLocal;
  est.window_y_max = window.y_max;
  est.sample_size = n_samples;
  bool any_return = false;
  for (int n : n_list) any_return = any_return || sys.in_window(orbit[n], window);
  if (!any_return) throw UnresolvedError("orbit escapes window");

  std::vector<std::vector<VolumeEstimate>> profiles(r_list.size());
  parallel_for(r_list.size(), [&](std::size_t i) {
    profiles[i] = ball_volume_profile(sys, x, n_max, r_list[i], n_samples, derive_seed(seed, i));
  });
  for (std::size_t i = 0; i < r_list.size(); ++i) {
    for (int n : n_list) {
      const VolumeEstimate& v = profiles[i][static_cast<std::size_t>(n - 1)];
      EntropyCell cell;
      cell.r = r_list[i];
      cell.n = n;
      cell.count = v.n_accepted;
      cell.resolved = v.n_accepted >= kMinAccepted;
      cell.returning = sys.in_window(orbit[n], window);
      cell.raw = v.mean > 0.0 ? -std::log(v.mean) : std::numeric_limits<double>::infinity();
      cell.std_err = v.mean > 0.0 ? v.std_err / v.mean : 0.0;
      est.cells.push_back(cell);
    }
  }
  finish(est, r_list, n_list, false);
  return est;
}

EntropyEstimate panel_estimate(EntropyMethod method, std::span<const EntropyEstimate> points) {
  EntropyEstimate out;
  out.method = method;
  std::vector<double> values;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    out.panel_values.push_back(p.resolved ? p.value : std::numeric_limits<double>::quiet_NaN());
    if (p.resolved) {
      values.push_back(p.value);
      out.r = std::max(out.r, p.r);
    }
    for (auto c : p.cells) {
      c.point = static_cast<int>(i);
      out.cells.push_back(c);
    }
    if (i == 0) {
      out.n_min = p.n_min;
      out.n_max = p.n_max;
      out.delta = p.delta;
      out.window_y_max = p.window_y_max;
      out.sample_size = p.sample_size;
    }
  }
  out.resolved = !values.empty() && 2 * values.size() >= points.size();
  if (out.resolved) out.value = median(values);
  return out;
}

EntropyEstimate riemannian_local_panel(const SystemModel& sys, std::span<const StatePoint> xs,
                                       const CompactWindow& window, std::span<const double> r_list,
                                       std::span<const int> n_list, long n_samples, std::uint64_t seed) {
  check_grid(r_list, n_list);
  std::vector<EntropyEstimate> points(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    try {
      points[i] = riemannian_local_entropy(sys, xs[i], window, r_list, n_list, n_samples,
                                           derive_seed(seed, i));
    } catch (const UnresolvedError&) {
      points[i].method = EntropyMethod::RiemannianLocal;
    } catch (const DivergenceError&) {
      points[i].method = EntropyMethod::RiemannianLocal;
    }
  }
  auto out = panel_estimate(EntropyMethod::RiemannianLocal, points);
  out.window_y_max = window.y_max;
  out.n_min = n_list.front();
  out.n_max = n_list.back();
  out.sample_size = n_samples;
  return out;
}

}  // namespace ergo
