#pragma once

#include <vector>

#include "nodalot/field.hpp"
#include "nodalot/nodal.hpp"

namespace nodalot {

// L^p norm over a node subset (quadrature sum; p = inf takes the sup).
// Empty region: 0 for p < inf, EmptyRegionSup for p = inf.
double lp_norm(const ScalarField& f, const std::vector<int>& region, double p);
double lp_norm(const ScalarField& f, const std::vector<char>& mask, double p);
double lp_norm(const ScalarField& f, double p);  // whole manifold

struct RetentionRow {
  double p = 0.0;
  double delta = 0.0;
  double delta_sqrtlambda = 0.0;
  double ratio_total = 0.0;  // ||phi||_p off the tube / ||phi||_p
  double ratio_pos = 0.0;    // ||phi^+||_p off the tube / ||phi||_p
  double ratio_neg = 0.0;
};

struct RetentionReport {
  double lambda = 0.0;
  std::vector<RetentionRow> rows;
};

// Mass retained outside the tube T_delta, for each (delta, p) pair.
// Propagates EmptyRegionSup when p = inf and the tube swallows the grid.
RetentionReport retention(const ScalarField& f, const NodalGeometry& ng,
                          const std::vector<double>& deltas, const std::vector<double>& ps);

struct TubeMassProfile {
  double p = 0.0;
  std::vector<double> delta_sqrtlambda;  // log-spaced probe widths
  std::vector<double> tube_fraction;     // ||phi||_p^p(T_delta) / ||phi||_p^p(M)
};

// p-mass captured by the tube across 24 log-spaced widths delta*sqrt(lambda)
// in [1e-2, measured density constant].  Nondecreasing in delta by design.
TubeMassProfile tube_mass_profile(const ScalarField& f, const NodalGeometry& ng, double p,
                                  int count = 24);

}  // namespace nodalot
