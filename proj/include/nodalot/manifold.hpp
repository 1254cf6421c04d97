#pragma once

#include <Eigen/Dense>

namespace nodalot {

// Chart coordinates of a point: (x, y) on the torus, (theta, phi) on the
// sphere with theta in [0, pi] measured from the north pole.
using Point = Eigen::Vector2d;

enum class ManifoldKind { FlatTorus, RoundSphere };

// Closed model surface carrying the exact metric.  Both supported geometries
// have closed-form geodesic distance, which everything downstream (grids,
// tubes, coverings, transport costs) relies on.
class Manifold {
 public:
  static Manifold flat_torus(double lx, double ly);
  static Manifold round_sphere(double radius);

  ManifoldKind kind() const { return kind_; }
  bool is_torus() const { return kind_ == ManifoldKind::FlatTorus; }

  double lx() const { return lx_; }
  double ly() const { return ly_; }
  double radius() const { return radius_; }

  double area() const;
  // Largest geodesic distance between any two points.
  double diameter() const;

  // Wraps/clamps chart coordinates into the fundamental range:
  // torus x in [0, lx), y in [0, ly); sphere theta in [0, pi], phi in [0, 2pi).
  Point reduce(const Point& p) const;

  // Exact geodesic distance between chart points.
  double distance(const Point& a, const Point& b) const;

  // Ambient embedding; the sphere maps to radius*S^2 in R^3, the torus chart
  // is returned as (x, y, 0) for code that wants a uniform 3-vector.
  Eigen::Vector3d embed(const Point& p) const;

 private:
  Manifold() = default;
  ManifoldKind kind_ = ManifoldKind::FlatTorus;
  double lx_ = 0, ly_ = 0;   // torus periods
  double radius_ = 0;        // sphere radius
};

// Unit tangent at a sphere chart point: orthonormal frame (e_theta, e_phi)
// as ambient 3-vectors.  Singular at the poles; callers guard.
void sphere_frame(const Point& p, Eigen::Vector3d& e_theta, Eigen::Vector3d& e_phi);

// Walks the unit-speed geodesic from `p` a distance `s` along the direction
// cos(alpha)*e_theta + sin(alpha)*e_phi.  Used by the lift quadrature.
Point sphere_exp(const Manifold& m, const Point& p, double alpha, double s);

}  // namespace nodalot
