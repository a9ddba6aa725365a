#include "ergo/models/flat.hpp"

#include <algorithm>
#include <cmath>

#include "ergo/core/errors.hpp"

namespace ergo {

namespace {

double wrap01(double x) {
  double r = x - std::floor(x);
  if (r >= 1.0) r = 0.0;
  return r;
}

Vec min_image(const Vec& d) {
  Vec out = d;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] -= std::round(out[i]);
  return out;
}

// Periodic uniform grid with cells no narrower than r_max.
class TorusGrid final : public CellMap {
 public:
  TorusGrid(int dim, double r_max)
      : dim_(dim), cells_(std::max(1, static_cast<int>(std::floor(1.0 / r_max)))) {}

  std::size_t cell_count() const override {
    std::size_t n = 1;
    for (int d = 0; d < dim_; ++d) n *= static_cast<std::size_t>(cells_);
    return n;
  }

  std::size_t cell_of(const StatePoint& p) const override {
    std::size_t c = 0;
    for (int d = 0; d < dim_; ++d) c = c * static_cast<std::size_t>(cells_) + static_cast<std::size_t>(coord_cell(p[d]));
    return c;
  }

  void cells_near(const StatePoint& center, double, std::vector<std::size_t>& out) const override {
    // Cells are at least r_max wide, so the neighbours at offset +-1 suffice.
    const std::size_t first = out.size();
    std::vector<int> axis[2];
    for (int d = 0; d < dim_; ++d) {
      if (cells_ <= 3) {
        for (int k = 0; k < cells_; ++k) axis[d].push_back(k);
      } else {
        const int base = coord_cell(center[d]);
        for (int k = -1; k <= 1; ++k) axis[d].push_back(((base + k) % cells_ + cells_) % cells_);
      }
    }
    if (dim_ == 1) {
      for (int i : axis[0]) out.push_back(static_cast<std::size_t>(i));
    } else {
      for (int i : axis[0]) {
        for (int j : axis[1]) out.push_back(static_cast<std::size_t>(i) * cells_ + static_cast<std::size_t>(j));
      }
    }
    std::sort(out.begin() + static_cast<std::ptrdiff_t>(first), out.end());
    out.erase(std::unique(out.begin() + static_cast<std::ptrdiff_t>(first), out.end()), out.end());
  }

 private:
  int coord_cell(double x) const {
    return std::min(cells_ - 1, std::max(0, static_cast<int>(std::floor(x * cells_))));
  }

  int dim_ = 1;
  int cells_ = 1;
};

}  // namespace

Vec wrap_unit(Vec v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = wrap01(v[i]);
  return v;
}

TorusEndomorphism::TorusEndomorphism(std::string id, Mat matrix, double potential)
    : id_(std::move(id)), matrix_(std::move(matrix)), potential_(potential) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() < 1 || matrix_.rows() > 2) {
    throw DomainError("torus endomorphism: matrix must be 1x1 or 2x2");
  }
}

StatePoint TorusEndomorphism::step(const StatePoint& x) const {
  return StatePoint(wrap_unit(matrix_ * x.coords));
}

double TorusEndomorphism::distance(const StatePoint& a, const StatePoint& b) const {
  return min_image(a.coords - b.coords).norm();
}

namespace {
// Same test as distance() < r without temporaries; cloud queries call it in bulk.
class TorusBallTest final : public BallTest {
 public:
  TorusBallTest(const StatePoint& center, double r) : dim_(center.dim()), r2_(r * r) {
    for (int d = 0; d < dim_; ++d) c_[d] = center[d];
  }
  bool contains(const StatePoint& p) const override {
    double s = 0.0;
    for (int d = 0; d < dim_; ++d) {
      double t = p[d] - c_[d];
      if (t > 0.5) t -= 1.0;
      else if (t < -0.5) t += 1.0;
      s += t * t;
    }
    return s < r2_;
  }

 private:
  int dim_;
  double r2_;
  double c_[kMaxDim] = {};
};
}  // namespace

std::unique_ptr<BallTest> TorusEndomorphism::ball_test(const StatePoint& center, double r) const {
  return std::make_unique<TorusBallTest>(center, r);
}

StatePoint TorusEndomorphism::chart_exp(const StatePoint& center, const Vec& v) const {
  return StatePoint(wrap_unit(center.coords + v));
}

Vec TorusEndomorphism::chart_log(const StatePoint& center, const StatePoint& p) const {
  return min_image(p.coords - center.coords);
}

double TorusEndomorphism::ref_volume_of_ball(const StatePoint&, double radius) const {
  if (radius > 0.5) throw DomainError("torus ball radius above 1/2 wraps around");
  return unit_ball_volume(dim()) * std::pow(radius, dim());
}

bool TorusEndomorphism::in_domain(const StatePoint& x) const {
  if (x.dim() != dim()) return false;
  for (int i = 0; i < x.dim(); ++i) {
    if (!(x[i] >= 0.0 && x[i] < 1.0)) return false;
  }
  return true;
}

bool TorusEndomorphism::volume_preserving() const {
  return std::abs(std::abs(matrix_.determinant()) - 1.0) < 1e-12;
}

std::unique_ptr<CellMap> TorusEndomorphism::make_cell_map(std::span<const StatePoint>,
                                                          double r_max) const {
  return std::make_unique<TorusGrid>(dim(), r_max);
}

std::unique_ptr<SystemModel> identity_system() {
  return std::make_unique<TorusEndomorphism>("identity", Mat::Identity(1, 1), 0.0);
}

std::unique_ptr<SystemModel> doubling_system() {
  return std::make_unique<TorusEndomorphism>("doubling", Mat::Constant(1, 1, 2.0), -std::log(2.0));
}

std::unique_ptr<SystemModel> cat_system() {
  Mat a(2, 2);
  a << 2.0, 1.0, 1.0, 1.0;
  return std::make_unique<TorusEndomorphism>("cat", a, -std::log((3.0 + std::sqrt(5.0)) / 2.0));
}

}  // namespace ergo
