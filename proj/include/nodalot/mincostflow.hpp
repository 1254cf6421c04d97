#pragma once

#include <vector>

#include <Eigen/Dense>

namespace nodalot {

struct FlowArc {
  int tail = 0;
  int head = 0;
  double cost = 0.0;
};

struct FlowResult {
  double cost = 0.0;         // optimal total cost over the input arcs
  std::vector<double> flow;  // per input arc, >= 0
  long pivots = 0;
  double artificial_residual = 0.0;  // mass left on the artificial root arcs
};

// Exact uncapacitated min-cost flow by the network simplex method (spanning
// tree basis rooted at an artificial node, block pricing, deepest-blocking
// leaving rule).  supply[v] > 0 injects mass at v, < 0 withdraws it; supplies
// must balance to 1e-9 of the total.  Throws InfeasibleFlow when mass cannot
// be routed and NotConverged when the pivot budget runs out.
FlowResult min_cost_flow(int n_nodes, const std::vector<FlowArc>& arcs,
                         const Eigen::ArrayXd& supply, long max_pivots = -1);

}  // namespace nodalot
