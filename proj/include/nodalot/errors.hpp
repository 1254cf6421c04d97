#pragma once

#include <stdexcept>
#include <string>

namespace nodalot {

// Base class for every domain error thrown by the library.  Callers that want
// blanket handling catch this; tests assert the concrete types.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Grid resolution below the minimum the samplers are specified for.
struct ResolutionTooCoarse : Error { using Error::Error; };
// Metric ball radius below half the mesh size; the node set cannot represent it.
struct EmptyBall : Error { using Error::Error; };
// Torus mode list mixing summands with different eigenvalues.
struct MixedEigenvalue : Error { using Error::Error; };
// Sphere gradient requested at a pole where the coordinate frame is singular
// and no continuous extension exists (order-1 azimuthal dependence).
struct PoleGradient : Error { using Error::Error; };
// Marching squares found no sign change anywhere on the grid.
struct NoZeroCrossing : Error { using Error::Error; };
// Requested sign absent from the queried ball.
struct NoSignPresent : Error { using Error::Error; };
// sup-norm over an empty node set.
struct EmptyRegionSup : Error { using Error::Error; };
// Doubling the lift quadrature shifted the frequency by more than 1%.
struct QuadratureUnderResolved : Error { using Error::Error; };
// Inner ball sup below 1e-14 of the field max: doubling ratio is degenerate.
struct ZeroOnBall : Error { using Error::Error; };
// Covering construction left a grid node outside every ball.
struct CoverageGap : Error { using Error::Error; };
// Signed splitting of a field that never changes sign.
struct OneSignedField : Error { using Error::Error; };
// Min-cost flow finished with nonzero artificial flow (unbalanced problem).
struct InfeasibleFlow : Error { using Error::Error; };
// Iterative solver exhausted its budget above the requested tolerance.
struct NotConverged : Error { using Error::Error; };
// 1-D transport oracle fed a profile with nonzero mean.
struct NonZeroMean : Error { using Error::Error; };
// Witness construction found no nodes of one sign clear of the tube.
struct EmptySignedRegion : Error { using Error::Error; };
// Power-law fit fed a non-positive abscissa or value.
struct NonPositiveValue : Error { using Error::Error; };

// Config parse/validation failure; carries the offending field path.
struct ConfigInvalid : Error {
  ConfigInvalid(const std::string& field_path, const std::string& message)
      : Error(field_path + ": " + message), field(field_path) {}
  std::string field;
};

}  // namespace nodalot
