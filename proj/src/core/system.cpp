#include "ergo/core/system.hpp"

#include <cmath>
#include <numbers>

namespace ergo {

std::string_view to_string(VolumeMethod m) {
  return m == VolumeMethod::MonteCarlo ? "monte-carlo" : "exact-oracle";
}

double SystemModel::chart_density(const StatePoint&, const Vec&) const { return 1.0; }

bool SystemModel::in_window(const StatePoint&, const CompactWindow&) const { return true; }

ChartSample SystemModel::chart_sample(const StatePoint& center, double radius, Rng& rng) const {
  const Vec v = uniform_in_ball(dim(), radius, rng);
  return {chart_exp(center, v), chart_density(center, v)};
}

namespace {
class DistanceBallTest final : public BallTest {
 public:
  DistanceBallTest(const SystemModel& sys, StatePoint center, double r)
      : sys_(sys), center_(std::move(center)), r_(r) {}
  bool contains(const StatePoint& p) const override { return sys_.distance(center_, p) < r_; }

 private:
  const SystemModel& sys_;
  StatePoint center_;
  double r_;
};
}  // namespace

std::unique_ptr<BallTest> SystemModel::ball_test(const StatePoint& center, double r) const {
  return std::make_unique<DistanceBallTest>(*this, center, r);
}

std::unique_ptr<CellMap> SystemModel::make_cell_map(std::span<const StatePoint>, double) const {
  return std::make_unique<SingleCell>();
}

Vec uniform_in_ball(int dim, double r, Rng& rng) {
  Vec v(dim);
  if (dim == 1) {
    v[0] = r * (2.0 * rng.uniform() - 1.0);
    return v;
  }
  double norm2 = 0.0;
  do {
    for (int i = 0; i < dim; ++i) v[i] = rng.normal();
    norm2 = v.squaredNorm();
  } while (norm2 == 0.0);
  const double radius = r * std::pow(rng.uniform(), 1.0 / dim);
  return v * (radius / std::sqrt(norm2));
}

double unit_ball_volume(int dim) {
  switch (dim) {
    case 1: return 2.0;
    case 2: return std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi / 3.0;
    default: return std::pow(std::numbers::pi, dim / 2.0) / std::tgamma(dim / 2.0 + 1.0);
  }
}

}  // namespace ergo
