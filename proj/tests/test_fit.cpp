#include <cmath>

#include "doctest.h"
#include "nodalot/errors.hpp"
#include "nodalot/fit.hpp"

using namespace nodalot;

TEST_CASE("linear fit recovers an exact line") {
  std::vector<double> x{1.0, 2.0, 3.5, 7.0, 11.0};
  std::vector<double> y;
  for (double v : x) y.push_back(-0.75 * v + 2.5);
  LinearFit lf = fit_linear(x, y);
  CHECK(lf.slope == doctest::Approx(-0.75).epsilon(1e-12));
  CHECK(lf.intercept == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(lf.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lf.residual_max <= 1e-12);
  CHECK(lf.points == 5);
}

TEST_CASE("linear fit flags scatter through r squared") {
  std::vector<double> x{0.0, 1.0, 2.0, 3.0};
  std::vector<double> y{0.0, 1.0, 0.0, 1.0};
  LinearFit lf = fit_linear(x, y);
  CHECK(lf.r_squared < 0.5);
  CHECK(lf.residual_max > 0.1);
}

TEST_CASE("power law fit recovers exponent and prefactor") {
  std::vector<double> x{0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::pow(v, -0.5));
  PowerLawFit pf = fit_power_law(x, y);
  CHECK(pf.exponent == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(pf.prefactor == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(pf.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pf.points == 6);
}

TEST_CASE("power law fit rejects nonpositive samples") {
  CHECK_THROWS_AS(fit_power_law({1.0, 2.0}, {1.0, 0.0}), NonPositiveValue);
  CHECK_THROWS_AS(fit_power_law({1.0, -2.0}, {1.0, 2.0}), NonPositiveValue);
}

TEST_CASE("fits demand at least two points") {
  CHECK_THROWS(fit_linear({1.0}, {2.0}));
  CHECK_THROWS(fit_linear({}, {}));
  CHECK_THROWS(fit_power_law({1.0}, {2.0}));
}
