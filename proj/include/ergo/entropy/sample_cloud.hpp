#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ergo/core/system.hpp"

namespace ergo {

// Points drawn from an invariant measure, tagged with where they came from.
struct SampleCloud {
  std::string system_id;
  std::string measure_id;  // "lebesgue", "liouville", "periodic-orbit" or "file:<path>"
  std::uint64_t seed = 0;
  std::vector<StatePoint> points;
};

// Measures shipped per model: lebesgue on the flat models; liouville and
// periodic-orbit on the modular geodesic flow.
std::vector<std::string> measure_ids(const SystemModel& sys);
SampleCloud sample_measure(const SystemModel& sys, std::string_view measure, long n,
                           std::uint64_t seed);
// Whether the measure is absolutely continuous w.r.t. the reference volume.
bool absolutely_continuous(std::string_view measure);

// Column names of the point-file header.
std::vector<std::string> coordinate_names(const SystemModel& sys);
// CSV point file: header row of coordinate names, one point per row.
SampleCloud load_point_file(const SystemModel& sys, const std::string& path);

}  // namespace ergo
