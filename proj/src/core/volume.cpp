#include "ergo/core/volume.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ergo/core/errors.hpp"
#include "ergo/core/orbit.hpp"
#include "ergo/core/parallel.hpp"

namespace ergo {

namespace {

constexpr long kBlockSize = 4096;

// Per-block weight sums binned by exit time.
struct ExitHistogram {
  std::vector<double> w;
  std::vector<double> w2;
  std::vector<long> count;

  explicit ExitHistogram(int n_max)
      : w(static_cast<std::size_t>(n_max) + 1), w2(w.size()), count(w.size()) {}
};

}  // namespace

std::vector<VolumeEstimate> ball_volume_profile(const SystemModel& sys, const StatePoint& center,
                                                int n_max, double r, long n_samples,
                                                std::uint64_t seed) {
  if (n_max < 1) throw DomainError("ball_volume: n must be >= 1");
  if (!(r > 0.0)) throw DomainError("ball_volume: r must be positive");
  if (n_samples < kMinVolumeSamples) {
    throw DomainError("ball_volume: need at least " + std::to_string(kMinVolumeSamples) +
                      " samples");
  }
  const double r_chart = sys.chart_radius(center);
  if (r > r_chart) {
    throw DomainError("ball_volume: r = " + std::to_string(r) + " exceeds the chart radius " +
                      std::to_string(r_chart) + " at the center");
  }

  const OrbitSegment orbit = iterate(sys, center, n_max);
  const DynBallTest test(sys, orbit, r);
  const double ref = sys.ref_volume_of_ball(center, r);

  const long n_blocks = (n_samples + kBlockSize - 1) / kBlockSize;
  std::vector<ExitHistogram> blocks(static_cast<std::size_t>(n_blocks), ExitHistogram(n_max));
  parallel_for(static_cast<std::size_t>(n_blocks), [&](std::size_t b) {
    Rng rng(derive_seed(seed, b));
    const long begin = static_cast<long>(b) * kBlockSize;
    const long end = std::min(n_samples, begin + kBlockSize);
    auto& h = blocks[b];
    for (long s = begin; s < end; ++s) {
      const ChartSample cs = sys.chart_sample(center, r, rng);
      const int k = test.exit_time(cs.point, n_max);
      h.w[k] += cs.weight;
      h.w2[k] += cs.weight * cs.weight;
      ++h.count[k];
    }
  });

  ExitHistogram total(n_max);
  for (const auto& h : blocks) {
    for (int k = 0; k <= n_max; ++k) {
      total.w[k] += h.w[k];
      total.w2[k] += h.w2[k];
      total.count[k] += h.count[k];
    }
  }
  double w_all = 0.0, w2_all = 0.0;
  for (int k = 0; k <= n_max; ++k) {
    w_all += total.w[k];
    w2_all += total.w2[k];
  }

  std::vector<VolumeEstimate> out(static_cast<std::size_t>(n_max));
  double w_in = 0.0, w2_in = 0.0;
  long accepted = 0;
  for (int n = n_max; n >= 1; --n) {
    w_in += total.w[n];
    w2_in += total.w2[n];
    accepted += total.count[n];
    const double f = w_in / w_all;
    const double var = w2_in * (1.0 - f) * (1.0 - f) + (w2_all - w2_in) * f * f;
    VolumeEstimate& e = out[static_cast<std::size_t>(n - 1)];
    e.mean = f * ref;
    e.std_err = std::sqrt(std::max(0.0, var)) / w_all * ref;
    e.n_samples = n_samples;
    e.n_accepted = accepted;
    e.method = VolumeMethod::MonteCarlo;
    e.underresolved = accepted == 0;
  }
  return out;
}

VolumeEstimate ball_volume(const SystemModel& sys, const StatePoint& center, int n, double r,
                           long n_samples, std::uint64_t seed) {
  return ball_volume_profile(sys, center, n, r, n_samples, seed).back();
}

}  // namespace ergo
