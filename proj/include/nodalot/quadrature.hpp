#pragma once

#include <Eigen/Dense>

namespace nodalot {

struct GaussRule {
  Eigen::ArrayXd nodes;    // abscissae on [-1, 1]
  Eigen::ArrayXd weights;  // weights summing to 2
};

// Gauss-Legendre rule of the given order (Newton iteration on P_n; accurate
// to machine precision for the orders used here, n <= 128).
GaussRule gauss_legendre(int n);

// Affine image of the rule on [a, b].
GaussRule gauss_legendre(int n, double a, double b);

}  // namespace nodalot
