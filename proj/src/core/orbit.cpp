#include "ergo/core/orbit.hpp"

#include <algorithm>

#include "ergo/core/errors.hpp"

namespace ergo {

OrbitSegment iterate(const SystemModel& sys, const StatePoint& x, int n) {
  if (n < 1) throw DomainError("iterate: n must be >= 1");
  if (!x.finite() || !sys.in_domain(x)) throw DomainError("iterate: base point outside the domain");
  OrbitSegment seg{x, {}};
  seg.states.reserve(static_cast<std::size_t>(n));
  seg.states.push_back(x);
  for (int i = 1; i < n; ++i) {
    StatePoint next;
    try {
      next = sys.step(seg.states.back());
    } catch (const DivergenceError& e) {
      throw e.shifted(i);
    }
    if (!next.finite()) throw DivergenceError("non-finite coordinates", i);
    seg.states.push_back(std::move(next));
  }
  return seg;
}

double dyn_distance(const SystemModel& sys, const StatePoint& x, const StatePoint& y, int n) {
  const OrbitSegment ox = iterate(sys, x, n);
  const OrbitSegment oy = iterate(sys, y, n);
  double d = 0.0;
  for (int i = 0; i < n; ++i) d = std::max(d, sys.distance(ox[i], oy[i]));
  return d;
}

bool in_dyn_ball(const SystemModel& sys, const StatePoint& center, const StatePoint& y, int n,
                 double r) {
  if (!(r > 0.0)) throw DomainError("in_dyn_ball: r must be positive");
  return dyn_distance(sys, center, y, n) < r;
}

DynBallTest::DynBallTest(const SystemModel& sys, const OrbitSegment& center_orbit, double r)
    : sys_(sys) {
  steps_.reserve(center_orbit.states.size());
  for (const auto& c : center_orbit.states) steps_.push_back(sys.ball_test(c, r));
}

int DynBallTest::exit_time(const StatePoint& y, int n_cap) const {
  n_cap = std::min(n_cap, n_max());
  StatePoint p = y;
  for (int i = 0; i < n_cap; ++i) {
    if (i > 0) {
      try {
        p = sys_.step(p);
      } catch (const DivergenceError&) {
        return i;
      }
      if (!p.finite()) return i;
    }
    if (!steps_[i]->contains(p)) return i;
  }
  return n_cap;
}

int DynBallTest::exit_time(const std::vector<StatePoint>& y_orbit, int n_cap) const {
  n_cap = std::min({n_cap, n_max(), static_cast<int>(y_orbit.size())});
  for (int i = 0; i < n_cap; ++i) {
    if (!steps_[i]->contains(y_orbit[i])) return i;
  }
  return n_cap;
}

}  // namespace ergo
