#include "ergo/core/fit.hpp"

#include <algorithm>
#include <limits>

#include "ergo/core/errors.hpp"

namespace ergo {

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("least_squares: need >= 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw DomainError("least_squares: x values are all equal");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

double max_ratio(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) throw DomainError("max_ratio: empty series");
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x.size(); ++i) best = std::max(best, y[i] / x[i]);
  return best;
}

}  // namespace ergo
