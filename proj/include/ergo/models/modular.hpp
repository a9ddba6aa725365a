#pragma once

#include <memory>

#include "ergo/core/system.hpp"
#include "ergo/models/psl2.hpp"

namespace ergo {

// Time-1 geodesic map on the unit tangent bundle of the modular surface.
// State coordinates are (x, y, θ) of the reduced representative. The chart at
// v is w -> v·exp(Y(w)) in the (flow, unstable, stable) frame; the reference
// measure is the Haar volume of that frame, i.e. √2 times dx dy dθ / y^2.
class ModularGeodesicSystem final : public SystemModel {
 public:
  std::string id() const override { return "modular-geodesic"; }
  int dim() const override { return 3; }
  StatePoint step(const StatePoint& x) const override;
  double distance(const StatePoint& a, const StatePoint& b) const override;
  Mat jacobian(const StatePoint& x) const override;

  StatePoint chart_exp(const StatePoint& center, const Vec& v) const override;
  Vec chart_log(const StatePoint& center, const StatePoint& p) const override;
  double chart_density(const StatePoint& center, const Vec& v) const override;
  // Half the smallest displacement of the center under the lattice (capped at 1/2).
  double chart_radius(const StatePoint& center) const override;
  ChartSample chart_sample(const StatePoint& center, double radius, Rng& rng) const override;
  double ref_volume_of_ball(const StatePoint& center, double radius) const override;
  double total_volume() const override;

  bool in_domain(const StatePoint& x) const override;
  bool in_window(const StatePoint& x, const CompactWindow& window) const override;
  double geometric_potential(const StatePoint&) const override { return -1.0; }

  std::unique_ptr<BallTest> ball_test(const StatePoint& center, double r) const override;
  std::unique_ptr<CellMap> make_cell_map(std::span<const StatePoint> points,
                                         double r_max) const override;
};

// Haar volume (frame units) of the metric ball of radius r in PSL(2,R).
double modular_group_ball_volume(double r);
// Frame-Haar volume per unit of dx dy dθ / y^2.
double modular_haar_per_liouville();

std::unique_ptr<SystemModel> modular_system();

}  // namespace ergo
