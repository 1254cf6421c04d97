#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nodalot/field.hpp"

namespace nodalot {

// One straight (chart) piece of the zero set, produced by marching squares
// inside a single grid cell.  Endpoints are cell-local chart coordinates, so
// a segment never wraps internally; `length` is geodesic (chord corrected to
// arc on the sphere).
struct NodalSegment {
  Point a, b;
  double length = 0.0;
};

// Zero set of a sampled field plus the derived geometry every consumer needs:
// segment soup, total length, per-node distance to the zero set, and the
// sign-domain labeling.
struct NodalGeometry {
  std::shared_ptr<const SampleGrid> grid;
  double eigenvalue = 0.0;
  double zero_band = 0.0;           // |phi| <= zero_band counts as "on the zero set"
  std::vector<NodalSegment> segments;
  double total_length = 0.0;
  Eigen::ArrayXd distance;          // exact point-to-segment within the near
                                    // field (~3 wavelengths), Dijkstra beyond;
                                    // 1-Lipschitz along grid edges either way
  double exact_radius = 0.0;        // distances <= this are exact, not graph
  Eigen::ArrayXi labels;            // connected sign component per node, 0 = zero band
  std::vector<int> domain_signs;    // sign of each label, index 1..domain_count
  int domain_count = 0;
};

// Marching squares with linear interpolation, then distance field and domain
// labeling.  Throws NoZeroCrossing when the field has a single strict sign.
NodalGeometry extract_nodal_set(const ScalarField& f, double eigenvalue);

// Connected components of {phi > band} and {phi < -band} under axis
// adjacency (diagonal contact across a saddle keeps domains separate, as in
// the continuum).  Returns the count; labels/signs as in NodalGeometry.
int nodal_domains(const ScalarField& f, double zero_band, Eigen::ArrayXi& labels,
                  std::vector<int>& domain_signs);

// Nodes within geodesic distance delta of the zero set (delta = 0 keeps only
// zero-band nodes).  Mask indexed by node id.
std::vector<char> tube_mask(const NodalGeometry& ng, double delta);

struct DensityRadius {
  double sup = 0.0;         // max over nodes of distance to the zero set
  double normalized = 0.0;  // sup * sqrt(lambda)
};
DensityRadius density_radius(const NodalGeometry& ng);

struct AsymmetryResult {
  double ratio = 0.0;           // volume fraction of {phi > 0} in the ball
  bool meets_nodal_set = true;  // false when the half-ball misses the zero set
};
AsymmetryResult asymmetry_ratio(const ScalarField& f, const NodalGeometry& ng,
                                const Point& center, double r);

struct InscribedBall {
  int node = -1;
  double value = 0.0;  // min(distance to zero set, distance to ball boundary)
};
// Largest sign-pure ball centered at a grid node inside B(center, r); sign is
// +1 or -1.  Ties break to the chart-lexicographic smallest node position.
// Throws NoSignPresent when the sign is absent from the ball.
InscribedBall inscribed_sign_ball(const ScalarField& f, const NodalGeometry& ng,
                                  const Point& center, double r, int sign);

std::string nodal_geometry_to_json(const NodalGeometry& ng);

}  // namespace nodalot
