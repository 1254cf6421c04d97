#pragma once

#include <Eigen/Dense>

namespace nodalot {

struct SinkhornOptions {
  double eps_start = 0.1;   // absolute regularization temperatures
  double eps_final = 1e-3;
  int stages = 6;           // geometric annealing schedule
  int iters_per_stage = 200;
  double marginal_tol = 1e-4;  // relative L1 defect of the final plan
};

struct SinkhornResult {
  double value = 0.0;         // transport cost of the regularized plan
  double marginal_err = 0.0;  // relative L1 marginal defect
  double eps = 0.0;
  int iterations = 0;
};

// Entropic OT in the log domain with epsilon annealing.  mu, nu are atomic
// masses matching the rows/cols of cost.  Throws NotConverged when the final
// marginal defect exceeds marginal_tol.
SinkhornResult sinkhorn_transport(const Eigen::MatrixXd& cost, const Eigen::ArrayXd& mu,
                                  const Eigen::ArrayXd& nu, const SinkhornOptions& opts = {});

}  // namespace nodalot
