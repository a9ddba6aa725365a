#pragma once

#include <cstdint>
#include <vector>

#include "ergo/core/system.hpp"

namespace ergo {

inline constexpr long kMinVolumeSamples = 1000;

// Monte-Carlo reference volume of B_n(center, r): samples from the model
// chart in the metric r-ball, density-weighted, accepted iff the sample stays
// in the ball for n steps. Requires r <= chart_radius(center).
VolumeEstimate ball_volume(const SystemModel& sys, const StatePoint& center, int n, double r,
                           long n_samples, std::uint64_t seed);

// Estimates for n = 1..n_max from one sample set (entry n-1 is B_n). Nested
// acceptance makes the profile non-increasing in n sample by sample.
std::vector<VolumeEstimate> ball_volume_profile(const SystemModel& sys, const StatePoint& center,
                                                int n_max, double r, long n_samples,
                                                std::uint64_t seed);

}  // namespace ergo
