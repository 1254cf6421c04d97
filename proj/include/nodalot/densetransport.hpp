#pragma once

#include <Eigen/Dense>

namespace nodalot {

// Exact optimal transport cost between atomic measures with a dense cost
// matrix (rows = supply atoms, cols = demand atoms), by successive shortest
// augmenting paths with Johnson potentials.  Independent of the graph flow
// solver on purpose: the two must agree on shared instances.
double dense_transport_cost(const Eigen::MatrixXd& cost, const Eigen::ArrayXd& supply,
                            const Eigen::ArrayXd& demand);

}  // namespace nodalot
