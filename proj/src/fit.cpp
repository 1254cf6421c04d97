#include "nodalot/fit.hpp"

#include <cmath>
#include <stdexcept>

#include "nodalot/errors.hpp"

namespace nodalot {

LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_linear: need two matching samples at least");
  const int n = static_cast<int>(x.size());
  double sx = 0.0, sy = 0.0;
  for (int i = 0; i < n; ++i) {
    sx += x[static_cast<size_t>(i)];
    sy += y[static_cast<size_t>(i)];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    const double dx = x[static_cast<size_t>(i)] - mx, dy = y[static_cast<size_t>(i)] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0) throw std::invalid_argument("fit_linear: degenerate abscissa");
  LinearFit fit;
  fit.points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = y[static_cast<size_t>(i)] - (fit.intercept + fit.slope * x[static_cast<size_t>(i)]);
    ss_res += r * r;
    fit.residual_max = std::max(fit.residual_max, std::abs(r));
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_power_law: need two matching samples at least");
  std::vector<double> lx(x.size()), ly(y.size());
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw NonPositiveValue("fit_power_law: sample " + std::to_string(i) +
                             " outside the positive quadrant");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const LinearFit lin = fit_linear(lx, ly);
  PowerLawFit fit;
  fit.exponent = lin.slope;
  fit.prefactor = std::exp(lin.intercept);
  fit.r_squared = lin.r_squared;
  fit.residual_max = lin.residual_max;
  fit.points = lin.points;
  return fit;
}

}  // namespace nodalot
