#pragma once

#include <memory>
#include <string>

#include "ergo/core/system.hpp"

namespace ergo {

// Linear endomorphism x -> A x (mod 1) of the flat torus R^d / Z^d with the
// minimum-image metric and Lebesgue measure. Covers the identity and doubling
// maps of the circle (d = 1) and the cat map (d = 2).
class TorusEndomorphism final : public SystemModel {
 public:
  TorusEndomorphism(std::string id, Mat matrix, double potential);

  std::string id() const override { return id_; }
  int dim() const override { return static_cast<int>(matrix_.rows()); }
  StatePoint step(const StatePoint& x) const override;
  double distance(const StatePoint& a, const StatePoint& b) const override;
  Mat jacobian(const StatePoint&) const override { return matrix_; }

  StatePoint chart_exp(const StatePoint& center, const Vec& v) const override;
  Vec chart_log(const StatePoint& center, const StatePoint& p) const override;
  double chart_radius(const StatePoint&) const override { return 0.25; }
  double ref_volume_of_ball(const StatePoint& center, double radius) const override;
  double total_volume() const override { return 1.0; }

  bool in_domain(const StatePoint& x) const override;
  bool volume_preserving() const override;
  double geometric_potential(const StatePoint&) const override { return potential_; }

  std::unique_ptr<BallTest> ball_test(const StatePoint& center, double r) const override;
  std::unique_ptr<CellMap> make_cell_map(std::span<const StatePoint> points,
                                         double r_max) const override;

 private:
  std::string id_;
  Mat matrix_;
  double potential_;
};

// Reduces each coordinate into [0, 1).
Vec wrap_unit(Vec v);

std::unique_ptr<SystemModel> identity_system();
std::unique_ptr<SystemModel> doubling_system();
std::unique_ptr<SystemModel> cat_system();

}  // namespace ergo
