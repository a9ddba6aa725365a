#pragma once

#include <span>

namespace ergo {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Ordinary least squares y ~ slope * x + intercept (needs >= 2 distinct x).
LineFit least_squares(std::span<const double> x, std::span<const double> y);

// Largest secant slope y[i]/x[i] (rates of the form -log(v)/n are secants
// through the origin).
double max_ratio(std::span<const double> x, std::span<const double> y);

}  // namespace ergo
