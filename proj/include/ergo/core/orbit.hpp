#pragma once

#include <memory>
#include <vector>

#include "ergo/core/system.hpp"

namespace ergo {

// x, T x, ..., T^{n-1} x. Throws DivergenceError carrying the orbit index.
OrbitSegment iterate(const SystemModel& sys, const StatePoint& x, int n);

// max_{0 <= i < n} d(T^i x, T^i y).
double dyn_distance(const SystemModel& sys, const StatePoint& x, const StatePoint& y, int n);

// Open dynamical ball: dyn_distance < r.
bool in_dyn_ball(const SystemModel& sys, const StatePoint& center, const StatePoint& y, int n,
                 double r);

// Membership in the nested balls B_1 ⊇ B_2 ⊇ ... around a fixed center orbit.
class DynBallTest {
 public:
  DynBallTest(const SystemModel& sys, const OrbitSegment& center_orbit, double r);

  int n_max() const { return static_cast<int>(steps_.size()); }
  // Largest k <= n_cap with T^i y in B(T^i c, r) for all i < k, i.e. y lies in
  // B_k(c, r) but not B_{k+1}. A point whose orbit diverges leaves at that step.
  int exit_time(const StatePoint& y, int n_cap) const;
  int exit_time(const StatePoint& y) const { return exit_time(y, n_max()); }
  // Same, for a precomputed orbit of y (states.size() >= n_cap).
  int exit_time(const std::vector<StatePoint>& y_orbit, int n_cap) const;
  bool contains_step(int i, const StatePoint& p) const { return steps_[i]->contains(p); }

 private:
  const SystemModel& sys_;
  std::vector<std::unique_ptr<BallTest>> steps_;
};

}  // namespace ergo
