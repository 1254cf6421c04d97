#pragma once

#include <memory>

#include <Eigen/Dense>

#include "nodalot/grid.hpp"

namespace nodalot {

// A function sampled on a grid; values[id] belongs to grid->node(id).
struct ScalarField {
  std::shared_ptr<const SampleGrid> grid;
  Eigen::ArrayXd values;
};

inline double field_max_abs(const ScalarField& f) { return f.values.abs().maxCoeff(); }

}  // namespace nodalot
