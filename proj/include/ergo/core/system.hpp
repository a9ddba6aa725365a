#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ergo/core/rng.hpp"
#include "ergo/core/types.hpp"

namespace ergo {

struct ChartSample {
  StatePoint point;
  double weight = 1.0;  // reference density at the sample, relative to the proposal
};

// Exact membership test for the metric ball B(center, r). Models may
// precompute per-center data (e.g. lattice images) once per query.
class BallTest {
 public:
  virtual ~BallTest() = default;
  virtual bool contains(const StatePoint& p) const = 0;
};

// Partition of the state space into cells, used to index point clouds.
class CellMap {
 public:
  virtual ~CellMap() = default;
  virtual std::size_t cell_count() const = 0;
  virtual std::size_t cell_of(const StatePoint& p) const = 0;
  // Sorted, duplicate-free cells that can hold points within distance r of
  // center (r <= the build radius).
  virtual void cells_near(const StatePoint& center, double r, std::vector<std::size_t>& out) const = 0;
};

// A discrete-time smooth system: the time-1 map on a Riemannian manifold with
// its metric, tangent cocycle and reference (Riemannian) volume.
//
// Tangent vectors are expressed in the model's local chart around each point:
// `chart_exp(x, v)` with v in an orthonormal frame at x, so the metric ball of
// radius r around x is the image of the Euclidean r-ball in the chart (for
// r <= chart_radius(x)). `jacobian(x)` maps the frame at x to the frame at
// step(x).
class SystemModel {
 public:
  virtual ~SystemModel() = default;

  virtual std::string id() const = 0;
  virtual int dim() const = 0;

  // Throws DivergenceError(index 0) if the image leaves the numeric range.
  virtual StatePoint step(const StatePoint& x) const = 0;
  virtual double distance(const StatePoint& a, const StatePoint& b) const = 0;
  virtual Mat jacobian(const StatePoint& x) const = 0;

  virtual StatePoint chart_exp(const StatePoint& center, const Vec& v) const = 0;
  virtual Vec chart_log(const StatePoint& center, const StatePoint& p) const = 0;
  // Reference-volume density of the chart at tangent coordinate v (1 at v = 0).
  virtual double chart_density(const StatePoint& center, const Vec& v) const;
  // Largest radius for which the chart is injective on the metric ball.
  virtual double chart_radius(const StatePoint& center) const = 0;
  // Point uniform (in chart coordinates) in the metric ball, weighted by density.
  virtual ChartSample chart_sample(const StatePoint& center, double radius, Rng& rng) const;
  virtual double ref_volume_of_ball(const StatePoint& center, double radius) const = 0;
  // Reference volume of the whole space (finite for all shipped models).
  virtual double total_volume() const = 0;

  virtual bool in_domain(const StatePoint& x) const = 0;
  virtual bool in_window(const StatePoint& x, const CompactWindow& window) const;
  virtual bool volume_preserving() const { return true; }

  // -log of the unstable jacobian at x (the geometric potential).
  virtual double geometric_potential(const StatePoint& x) const = 0;

  virtual std::unique_ptr<BallTest> ball_test(const StatePoint& center, double r) const;
  virtual std::unique_ptr<CellMap> make_cell_map(std::span<const StatePoint> points,
                                                 double r_max) const;
};

// Uniform point in the Euclidean ball of radius r in R^dim.
Vec uniform_in_ball(int dim, double r, Rng& rng);
// Lebesgue volume of the unit ball in R^dim.
double unit_ball_volume(int dim);

// One cell holding everything (fallback for models without geometry hints).
class SingleCell final : public CellMap {
 public:
  std::size_t cell_count() const override { return 1; }
  std::size_t cell_of(const StatePoint&) const override { return 0; }
  void cells_near(const StatePoint&, double, std::vector<std::size_t>& out) const override {
    out.push_back(0);
  }
};

}  // namespace ergo
