#include <cmath>

#include "doctest.h"
#include "nodalot/eigenmodel.hpp"
#include "nodalot/errors.hpp"
#include "nodalot/grid.hpp"

using namespace nodalot;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("sin(kx) mode: eigenvalue, values, gradient") {
  Eigenfunction e = make_torus_mode({{3, 0, 1.0, 0.0}});
  CHECK(e.eigenvalue == doctest::Approx(9.0));
  CHECK(evaluate(e, Point(kPi / 6, 1.0)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(evaluate(e, Point(0.0, 2.0)) == doctest::Approx(0.0).epsilon(1e-14));
  Eigen::Vector2d gr = gradient(e, Point(0.0, 0.5));
  CHECK(gr.x() == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(gr.y() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("mixed-eigenvalue summand lists are rejected") {
  CHECK_THROWS_AS(make_torus_mode({{1, 0, 1.0, 0.0}, {2, 0, 0.5, 0.0}}),
                  MixedEigenvalue);
  // (3,4) and (5,0) share lambda = 25: allowed
  Eigenfunction e = make_torus_mode({{3, 4, 1.0, 0.2}, {5, 0, 0.7, 1.3}});
  CHECK(e.eigenvalue == doctest::Approx(25.0));
}

TEST_CASE("random torus combinations are seeded draws of one eigenspace") {
  Eigenfunction a = random_torus_combination(25, 42);
  Eigenfunction b = random_torus_combination(25, 42);
  Eigenfunction c = random_torus_combination(25, 43);
  CHECK(a.eigenvalue == doctest::Approx(25.0));
  Point p(1.234, 5.678);
  CHECK(evaluate(a, p) == evaluate(b, p));
  CHECK(evaluate(a, p) != evaluate(c, p));
  // no integer representations a^2 + b^2 = 3
  CHECK_THROWS(random_torus_combination(3, 1));
}

TEST_CASE("sphere harmonic Y_1^0 and the beam family") {
  // Y_1^0 ~ cos(theta), lambda = 2/R^2
  Eigenfunction y10 = make_sphere_harmonic(1, 0);
  CHECK(y10.eigenvalue == doctest::Approx(2.0));
  double north = evaluate(y10, Point(0.0, 0.0));
  double south = evaluate(y10, Point(kPi, 0.0));
  CHECK(north == doctest::Approx(-south).epsilon(1e-13));
  CHECK(evaluate(y10, Point(kPi / 2, 1.0)) == doctest::Approx(0.0).epsilon(1e-13));

  Eigenfunction beam = make_gaussian_beam(8);
  CHECK(beam.eigenvalue == doctest::Approx(8.0 * 9.0));
  // concentrates on the equator: sin(theta)^l * cos(l phi)
  CHECK(evaluate(beam, Point(kPi / 2, 0.0)) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(std::abs(evaluate(beam, Point(kPi / 6, 0.0))) <
        std::pow(0.5, 8) + 1e-12);
  // radius scaling: lambda = l(l+1)/R^2
  Eigenfunction beam2 = make_gaussian_beam(8, 2.0);
  CHECK(beam2.eigenvalue == doctest::Approx(8.0 * 9.0 / 4.0));
}

TEST_CASE("pole gradient: order-1 azimuthal dependence has no extension") {
  Eigenfunction y11 = make_sphere_harmonic(1, 1);
  CHECK_THROWS_AS(gradient(y11, Point(0.0, 0.0)), PoleGradient);
  // zonal harmonics extend fine
  Eigenfunction y20 = make_sphere_harmonic(2, 0);
  Eigen::Vector2d g = gradient(y20, Point(0.0, 0.0));
  CHECK(std::abs(g.x()) < 1e-12);
  CHECK(std::abs(g.y()) < 1e-12);
}

TEST_CASE("residual_check is second order in the mesh") {
  Eigenfunction e = make_torus_mode({{4, 0, 1.0, 0.3}});
  double r1 = residual_check(e, 96);
  double r2 = residual_check(e, 192);
  CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.05));

  Eigenfunction beam = make_gaussian_beam(8);
  double s1 = residual_check(beam, 64);
  double s2 = residual_check(beam, 128);
  CHECK(s1 / s2 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("sampling matches pointwise evaluation") {
  Eigenfunction e = random_torus_combination(100, 7);
  auto g = build_grid(e.manifold, 48);
  ScalarField f = sample(e, g);
  for (int id : {0, 17, 1000, 2303})
    CHECK(f.values[id] == doctest::Approx(evaluate(e, g->node(id))).epsilon(1e-14));
}

TEST_CASE("json round trip preserves the eigenfunction exactly") {
  for (Eigenfunction e :
       {random_torus_combination(325, 99), make_gaussian_beam(16, 1.0),
        make_sphere_harmonic(5, -3, 0.8, 2.0)}) {
    Eigenfunction back = eigenfunction_from_json(eigenfunction_to_json(e));
    CHECK(back.eigenvalue == e.eigenvalue);
    for (int i = 0; i < 5; ++i) {
      Point p(0.3 + 0.61 * i, 0.9 + 0.47 * i);
      CHECK(evaluate(back, p) == evaluate(e, p));
    }
  }
}
