#pragma once

#include <functional>

namespace nodalot {

// W1 distance between the positive and negative parts of a zero-mean profile
// g on a circle of circumference `period`, extruded over a transverse length
// `transverse` (product geometry with translation-invariant profiles):
//   W1 = transverse * min_c integral |G - c|,  G(x) = cumulative of g.
// The cumulative uses the trapezoid rule (piecewise-linear G), the median
// level c is found by bisection on the exact PL subgradient, and the integral
// splits each segment at its crossing, so the discrete answer is exact for
// the PL model.  Throws NonZeroMean when the profile mean is not ~0.
double w1_oracle_circle(const std::function<double(double)>& g, double period,
                        double transverse, int samples = 1 << 17);

}  // namespace nodalot
