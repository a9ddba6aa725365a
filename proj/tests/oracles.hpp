#pragma once

// Independent reference computations used only by the tests.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Pt = Eigen::Vector2d;
using Polygon = std::vector<Pt>;

inline double polygon_area(const Polygon& p) {
  double a = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Pt& u = p[i];
    const Pt& v = p[(i + 1) % p.size()];
    a += u.x() * v.y() - u.y() * v.x();
  }
  return 0.5 * std::abs(a);
}

// Sutherland-Hodgman clip of `subject` against a convex counter-clockwise polygon.
inline Polygon clip(const Polygon& subject, const Polygon& clipper) {
  Polygon out = subject;
  for (std::size_t e = 0; e < clipper.size() && !out.empty(); ++e) {
    const Pt a = clipper[e], b = clipper[(e + 1) % clipper.size()];
    auto inside = [&](const Pt& p) { return (b - a).x() * (p - a).y() - (b - a).y() * (p - a).x() >= 0; };
    auto cross = [&](const Pt& p, const Pt& q) {
      const Pt d = q - p, ed = b - a;
      const double t = (ed.x() * (a - p).y() - ed.y() * (a - p).x()) / (ed.x() * d.y() - ed.y() * d.x());
      return Pt(p + t * d);
    };
    Polygon in = std::move(out);
    out.clear();
    for (std::size_t i = 0; i < in.size(); ++i) {
      const Pt cur = in[i], prev = in[(i + in.size() - 1) % in.size()];
      if (inside(cur)) {
        if (!inside(prev)) out.push_back(cross(prev, cur));
        out.push_back(cur);
      } else if (inside(prev)) {
        out.push_back(cross(prev, cur));
      }
    }
  }
  return out;
}

// Polygon inscribed in the ellipse {v : |M v| < r}, counter-clockwise.
inline Polygon ellipse_polygon(const Eigen::Matrix2d& m, double r, int vertices) {
  const Eigen::Matrix2d inv = m.inverse();
  Polygon p;
  for (int k = 0; k < vertices; ++k) {
    const double t = 2.0 * std::numbers::pi * k / vertices;
    p.push_back(inv * Pt(r * std::cos(t), r * std::sin(t)));
  }
  if (inv.determinant() < 0) std::reverse(p.begin(), p.end());
  return p;
}

// Area of {v : |P_i v| < r, i < n} for a sequence of 2x2 matrices.
inline double tangent_ball_area(const std::vector<Eigen::Matrix2d>& products, double r,
                                int vertices = 1 << 14) {
  Polygon region = ellipse_polygon(products[0], r, vertices);
  for (std::size_t i = 1; i < products.size(); ++i) {
    region = clip(region, ellipse_polygon(products[i], r, vertices));
  }
  return polygon_area(region);
}

inline std::vector<Eigen::Matrix2d> cat_powers(int n) {
  Eigen::Matrix2d a;
  a << 2, 1, 1, 1;
  std::vector<Eigen::Matrix2d> out{Eigen::Matrix2d::Identity()};
  for (int i = 1; i < n; ++i) out.push_back(a * out.back());
  return out;
}

// For r < 0.19 the cat dynamical ball is exactly the linear one.
inline double cat_dyn_ball_area(int n, double r) { return tangent_ball_area(cat_powers(n), r); }

}  // namespace oracle
