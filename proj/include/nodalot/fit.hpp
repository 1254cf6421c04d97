#pragma once

#include <vector>

namespace nodalot {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
  double residual_max = 0.0;
  int points = 0;
};

LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y);

struct PowerLawFit {
  double exponent = 0.0;
  double prefactor = 0.0;  // y ~ prefactor * x^exponent
  double r_squared = 1.0;
  double residual_max = 0.0;  // max |log y - log fit|
  int points = 0;
};

// Least squares in log-log coordinates; throws NonPositiveValue when a sample
// cannot be mapped there.
PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace nodalot
