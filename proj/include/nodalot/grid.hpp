#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "nodalot/manifold.hpp"

namespace nodalot {

// Quadrature/sampling lattice over a manifold, with exact cell weights and a
// neighbor graph whose edge lengths are geodesic distances.
//
// Torus: an n x n uniform lattice, node (i, j) at (i*lx/n, j*ly/n), weight
// (lx/n)*(ly/n).  Sphere: n latitude rings at theta_i = (i+1/2)*pi/n (poles
// excluded) times 2n longitude columns; the weight of a node is the exact
// area of its latitude-longitude cell, so the weights sum to 4*pi*R^2 in
// closed form at every resolution.
struct SampleGrid {
  Manifold manifold = Manifold::flat_torus(1.0, 1.0);
  int ni = 0;  // rows: torus y-count, sphere theta-ring count
  int nj = 0;  // cols: torus x-count, sphere phi-column count

  Eigen::Matrix2Xd nodes;   // chart coordinates per node, column = node id
  Eigen::ArrayXd weights;   // positive quadrature weights, sum = area(M)
  double spacing = 0.0;     // characteristic mesh size h (max axis step)
  double step_i = 0.0;      // chart step between rows (y or theta)
  double step_j = 0.0;      // chart step between columns (x or phi)

  // CSR adjacency: 8-neighbor stencil (axis + diagonal), both directions
  // stored.  adj_lengths are geodesic edge lengths.
  std::vector<int> adj_offsets;
  std::vector<int> adj_targets;
  std::vector<double> adj_lengths;

  int node_count() const { return static_cast<int>(nodes.cols()); }
  int index(int i, int j) const { return i * nj + j; }
  int row_of(int id) const { return id / nj; }
  int col_of(int id) const { return id % nj; }
  Point node(int id) const { return nodes.col(id); }
};

// Builds the lattice at `resolution` nodes per axis (the sphere uses
// `resolution` rings and 2*resolution columns so both chart steps match).
// Throws ResolutionTooCoarse below 8.
std::shared_ptr<const SampleGrid> build_grid(const Manifold& m, int resolution);

// Node ids within geodesic distance r of `center` (any chart point, not
// necessarily a node).  Throws EmptyBall when r < h/2; a ball with r >= h is
// guaranteed nonempty.  Uses an index-window prefilter, then the exact metric.
std::vector<int> metric_ball(const SampleGrid& g, const Point& center, double r);

// Id of the lattice node nearest to an arbitrary chart point.
int nearest_node(const SampleGrid& g, const Point& p);

// Multi-source shortest path over the adjacency graph.  `seed_values` holds
// initial labels (non-seeds = +inf); returns the relaxed distance field,
// which is 1-Lipschitz along edges whenever the seeds are.
Eigen::ArrayXd grid_dijkstra(const SampleGrid& g, const Eigen::ArrayXd& seed_values);

}  // namespace nodalot
