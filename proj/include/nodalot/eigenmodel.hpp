#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "nodalot/field.hpp"
#include "nodalot/manifold.hpp"

namespace nodalot {

// One plane-wave summand a * sin(2pi*k/lx * x + 2pi*l/ly * y + phase).
struct TorusModeSummand {
  int k = 0;
  int l = 0;
  double amplitude = 1.0;
  double phase = 0.0;
};

struct TorusMode {
  std::vector<TorusModeSummand> summands;
};

// Real spherical harmonic of degree l, order m (m < 0 selects the sin(m phi)
// branch), in the orthonormal normalization, scaled by `amplitude`.
struct SphereHarmonic {
  int degree = 1;
  int order = 0;
  double amplitude = 1.0;
};

// Highest-weight harmonic sin(theta)^l * cos(l phi): the Gaussian-beam model,
// concentrating on the equator with transverse width ~ l^{-1/2}.
struct GaussianBeam {
  int degree = 1;
};

// A closed-form Laplace eigenfunction on its manifold: -Laplace(phi) = lambda*phi.
struct Eigenfunction {
  Manifold manifold = Manifold::flat_torus(2 * 3.14159265358979323846, 2 * 3.14159265358979323846);
  std::variant<TorusMode, SphereHarmonic, GaussianBeam> family;
  double eigenvalue = 0.0;
  std::uint64_t seed = 0;  // draw seed when generated randomly, else 0
};

// Throws MixedEigenvalue when summands disagree on the eigenvalue.
Eigenfunction make_torus_mode(const Manifold& m, std::vector<TorusModeSummand> summands);
Eigenfunction make_torus_mode(std::vector<TorusModeSummand> summands);  // 2pi x 2pi torus

Eigenfunction make_gaussian_beam(int degree, double radius = 1.0);
Eigenfunction make_sphere_harmonic(int degree, int order, double amplitude = 1.0, double radius = 1.0);

// Seeded random element of the lambda-eigenspace on the 2pi-torus: a draw of
// amplitudes/phases over the integer lattice representations a^2 + b^2 =
// lambda (at most `max_summands` of them).  Deterministic in `seed`.
Eigenfunction random_torus_combination(int lambda, std::uint64_t seed, int max_summands = 6);

double evaluate(const Eigenfunction& e, const Point& p);

// Gradient components in the orthonormal chart frame: (d/dx, d/dy) on the
// torus, (d/dtheta, (1/sin theta) d/dphi) on the sphere.  Throws PoleGradient
// at theta in {0, pi} when no continuous extension exists.
Eigen::Vector2d gradient(const Eigenfunction& e, const Point& p);

ScalarField sample(const Eigenfunction& e, std::shared_ptr<const SampleGrid> grid);

// Max norm of the discrete Laplacian residual |L_h phi + lambda*phi| over
// interior stencils at the given resolution.  Second-order stencils: the
// ratio residual(n)/residual(2n) sits near 4 for resolved fields.
double residual_check(const Eigenfunction& e, int resolution);

std::string eigenfunction_to_json(const Eigenfunction& e);
Eigenfunction eigenfunction_from_json(const std::string& text);

}  // namespace nodalot
