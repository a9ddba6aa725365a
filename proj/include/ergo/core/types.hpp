#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ergo {

inline constexpr int kMaxDim = 3;

// Small dynamic vectors/matrices with inline storage (state dimension <= 3).
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

// A point of the state space in the model's global chart coordinates.
struct StatePoint {
  Vec coords;

  StatePoint() = default;
  explicit StatePoint(Vec c) : coords(std::move(c)) {}
  StatePoint(std::initializer_list<double> values) : coords(static_cast<Eigen::Index>(values.size())) {
    Eigen::Index i = 0;
    for (double v : values) coords[i++] = v;
  }

  int dim() const { return static_cast<int>(coords.size()); }
  double operator[](int i) const { return coords[i]; }
  double& operator[](int i) { return coords[i]; }
  bool finite() const { return coords.allFinite(); }
  bool operator==(const StatePoint& other) const {
    return coords.size() == other.coords.size() && coords == other.coords;
  }
};

struct OrbitSegment {
  StatePoint base;
  std::vector<StatePoint> states;  // states[0] == base

  int length() const { return static_cast<int>(states.size()); }
  const StatePoint& operator[](int i) const { return states[static_cast<std::size_t>(i)]; }
};

enum class VolumeMethod { MonteCarlo, ExactOracle };

std::string_view to_string(VolumeMethod m);

struct VolumeEstimate {
  double mean = 0.0;  // reference-measure units
  double std_err = 0.0;
  long n_samples = 0;
  long n_accepted = 0;
  VolumeMethod method = VolumeMethod::MonteCarlo;
  bool underresolved = false;  // zero accepted samples
};

// Compact subset used to filter return times. Models without a cusp ignore it
// (the whole space is compact).
struct CompactWindow {
  std::optional<double> y_max;

  static CompactWindow whole_space() { return {}; }
  static CompactWindow cusp_cutoff(double y_max) { return CompactWindow{y_max}; }
  bool bounded() const { return y_max.has_value(); }
};

}  // namespace ergo
