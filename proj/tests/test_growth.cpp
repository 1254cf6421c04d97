#include <cmath>

#include "doctest.h"
#include "nodalot/eigenmodel.hpp"
#include "nodalot/errors.hpp"
#include "nodalot/grid.hpp"
#include "nodalot/growth.hpp"
#include "nodalot/nodal.hpp"

using namespace nodalot;

namespace {
constexpr double kPi = 3.14159265358979323846;

ScalarField torus_field(int k, int n) {
  Eigenfunction e = make_torus_mode({{k, 0, 1.0, 0.0}});
  return sample(e, build_grid(e.manifold, n));
}
}  // namespace

TEST_CASE("sup doubling exponent: crest balls are flat, zero balls grow") {
  ScalarField f = torus_field(2, 192);
  // crest of sin(2x) at x = pi/4 lies on the grid: both sups hit 1 exactly
  CHECK(doubling_exponent(f, Point(kPi / 4, 1.0), 0.4) == 0.0);
  // centered on the nodal line the field grows linearly, so the sup doubles
  double d = doubling_exponent(f, Point(0.0, 2.0), 0.3);
  CHECK(d > 0.3);
  CHECK(d < std::log(2.0) + 0.05);
  // 2B contains B: the exponent can never be negative
  for (double r : {0.2, 0.5, 1.0})
    CHECK(doubling_exponent(f, Point(1.1, 0.7), r) >= 0.0);
}

TEST_CASE("sup doubling exponent rejects a dead inner ball") {
  Eigenfunction e = make_torus_mode({{2, 0, 1.0, 0.0}});
  ScalarField f = sample(e, build_grid(e.manifold, 96));
  f.values.setZero();
  f.values[f.grid->index(0, 0)] = 1.0;  // lone spike far from the probe
  CHECK_THROWS_AS(doubling_exponent(f, Point(kPi, kPi), 0.4), ZeroOnBall);
}

TEST_CASE("lp doubling exponent is nonnegative and zero for a global ball") {
  ScalarField f = torus_field(4, 96);
  CHECK(lp_doubling_exponent(f, Point(0.3, 0.9), 0.4, 2.0) >= 0.0);
  // a ball already holding everything cannot gain mass when doubled
  double whole = f.grid->manifold.diameter();
  CHECK(lp_doubling_exponent(f, Point(kPi, kPi), whole, 2.0) ==
        doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("flat lift frequency recovers the degree of homogeneous harmonics") {
  FlatLiftField deg1{[](const Eigen::Vector3d& p) { return p.z(); },
                     [](const Eigen::Vector3d&) { return 1.0; }};
  FlatLiftField deg2{[](const Eigen::Vector3d& p) { return p.x() * p.y(); },
                     [](const Eigen::Vector3d& p) { return p.x() * p.x() + p.y() * p.y(); }};
  FlatLiftField deg3{
      [](const Eigen::Vector3d& p) {
        return 2 * std::pow(p.z(), 3) - 3 * p.z() * (p.x() * p.x() + p.y() * p.y());
      },
      [](const Eigen::Vector3d& p) {
        double gx = -6 * p.x() * p.z();
        double gy = -6 * p.y() * p.z();
        double gz = 6 * p.z() * p.z() - 3 * (p.x() * p.x() + p.y() * p.y());
        return gx * gx + gy * gy + gz * gz;
      }};
  Eigen::Vector3d o = Eigen::Vector3d::Zero();
  const FlatLiftField* fields[] = {&deg1, &deg2, &deg3};
  for (int d = 1; d <= 3; ++d) {
    LiftFrequency lf = flat_lift_frequency(*fields[d - 1], o, 1.3);
    CHECK(lf.N == doctest::Approx(d).epsilon(1e-2));
    CHECK(lf.Ntilde == doctest::Approx(d).epsilon(1e-2));
    CHECK(lf.H > 0.0);
    CHECK(lf.D > 0.0);
  }
  // homogeneity makes the frequency scale-free
  LiftFrequency a = flat_lift_frequency(deg2, o, 0.5);
  LiftFrequency b = flat_lift_frequency(deg2, o, 1.5);
  CHECK(a.N == doctest::Approx(b.N).epsilon(1e-3));
}

TEST_CASE("flat lift frequency rejects a vanishing field") {
  FlatLiftField zero{[](const Eigen::Vector3d&) { return 0.0; },
                     [](const Eigen::Vector3d&) { return 0.0; }};
  CHECK_THROWS_AS(flat_lift_frequency(zero, Eigen::Vector3d::Zero(), 1.0), ZeroOnBall);
}

TEST_CASE("lifted frequency separates crest balls from nodal balls") {
  Eigenfunction e = make_torus_mode({{4, 0, 1.0, 0.0}});
  // the exponential lift direction feeds some growth into a crest ball, but
  // a nodal-centered ball dominates, and the gap widens as r -> 0
  LiftFrequency crest = lift_frequency(e, Point(kPi / 8, 1.0), 0.25);
  LiftFrequency nodal = lift_frequency(e, Point(0.0, 1.0), 0.25);
  CHECK(crest.N < 0.6);
  CHECK(nodal.N > 1.0);
  CHECK(nodal.N < 2.0);
  CHECK(nodal.N > 2.0 * crest.N);
  LiftFrequency crest_small = lift_frequency(e, Point(kPi / 8, 1.0), 0.1);
  LiftFrequency nodal_small = lift_frequency(e, Point(0.0, 1.0), 0.1);
  CHECK(crest_small.N < 0.1);
  CHECK(nodal_small.N == doctest::Approx(1.0).epsilon(0.05));
  // the Dirichlet form of the frequency agrees with the derivative form
  CHECK(nodal.Ntilde == doctest::Approx(nodal.N).epsilon(0.05));
}

TEST_CASE("frequency is almost monotone in the radius on a harmonic lift") {
  Eigenfunction e = make_torus_mode({{4, 0, 1.0, 0.0}});
  std::vector<double> radii{0.08, 0.13, 0.21, 0.34};
  MonotonicityReport rep = check_almost_monotonicity(e, Point(0.0, 2.0), radii, 0.1);
  CHECK(rep.radii.size() == 4);
  CHECK(rep.frequencies.size() == 4);
  CHECK(rep.values.size() == 6);  // all ordered pairs
  CHECK(rep.violations.empty());
}

TEST_CASE("neighbor frequency check") {
  Eigenfunction e = make_torus_mode({{4, 0, 1.0, 0.0}});
  // default floor of 10 is far above any frequency of this tame mode
  NeighborFrequencyResult idle =
      neighbor_frequency_check(e, Point(0.0, 1.0), Point(0.05, 1.0), 0.2);
  CHECK_FALSE(idle.applicable);
  CHECK(idle.passed);
  // with the floor disabled the dominance inequality is exercised for real
  NeighborFrequencyResult live =
      neighbor_frequency_check(e, Point(0.0, 1.0), Point(0.05, 1.0), 0.2, 4.0, 0.0);
  CHECK(live.applicable);
  CHECK(live.passed);
  CHECK(live.n1 > 0.0);
  CHECK(live.n2 > 0.99 * live.n1);
}

TEST_CASE("covering invariants on a torus mode") {
  Eigenfunction e = make_torus_mode({{4, 0, 1.0, 0.0}});
  ScalarField f = sample(e, build_grid(e.manifold, 96));
  NodalGeometry ng = extract_nodal_set(f, e.eigenvalue);
  Covering cov = build_covering(ng);
  CHECK(cov.r == doctest::Approx(2.0 / std::sqrt(e.eigenvalue)).epsilon(1e-12));
  CHECK(cov.multiplicity >= 1);
  CHECK(cov.multiplicity <= 16);
  CHECK(cov.balls.size() > 20);
  for (const CoverBall& b : cov.balls) {
    CHECK(b.r == cov.r);
    CHECK(b.center_node >= 0);
    CHECK(b.center_node < f.grid->node_count());
    // deep means the final center lies within r/2 of the nodal set
    bool near = ng.distance[b.center_node] <= 0.5 * cov.r + f.grid->spacing;
    if (b.deep) CHECK(near);
  }
}

TEST_CASE("ball scan and good-ball classification") {
  Eigenfunction e = make_torus_mode({{4, 0, 1.0, 0.0}});
  ScalarField f = sample(e, build_grid(e.manifold, 96));
  NodalGeometry ng = extract_nodal_set(f, e.eigenvalue);
  Covering cov = build_covering(ng);
  BallScanOptions opts;
  opts.frequency_budget = 12;
  opts.seed = 17;
  BallScan scan = scan_balls(f, e, cov, opts);
  CHECK(scan.rows.size() == cov.balls.size());
  CHECK(scan.frequency_samples <= 12);
  CHECK(scan.frequency_samples > 0);
  for (const BallScanRow& row : scan.rows) CHECK(row.np_ratio >= 1.0 - 1e-12);

  GoodBallReport rep = classify_good_balls(f, cov, scan, 8.0);
  CHECK(rep.d == 8.0);
  CHECK(rep.multiplicity == cov.multiplicity);
  CHECK(rep.mass_bound ==
        doctest::Approx(1.0 - cov.multiplicity * std::pow(2.0, -8.0)).epsilon(1e-12));
  CHECK(rep.mass_fraction_good >= rep.mass_bound);
  CHECK(rep.ball_fraction_good >= 0.0);
  CHECK(rep.ball_fraction_good <= 1.0);
  REQUIRE(rep.good_doubling.size() == scan.rows.size());
  REQUIRE(rep.good_frequency.size() == scan.rows.size());
  for (size_t i = 0; i < scan.rows.size(); ++i) {
    CHECK(rep.good_doubling[i] == (scan.rows[i].np_ratio <= std::pow(2.0, 8.0) ? 1 : 0));
    if (std::isnan(scan.rows[i].n_lift)) {
      CHECK(rep.good_frequency[i] == -1);
    } else {
      CHECK((rep.good_frequency[i] == 0 || rep.good_frequency[i] == 1));
    }
  }
}

TEST_CASE("df scan is deterministic in the seed") {
  ScalarField f = torus_field(8, 96);
  DoublingScanResult a = df_scan(f, 64.0, 40, 3);
  DoublingScanResult b = df_scan(f, 64.0, 40, 3);
  CHECK(a.probes == 40);
  CHECK(a.lambda == 64.0);
  CHECK(a.degenerate >= 0);
  CHECK(a.max_doubling >= a.mean_doubling);
  CHECK(a.mean_doubling >= 0.0);
  CHECK(a.max_doubling == b.max_doubling);
  CHECK(a.mean_doubling == b.mean_doubling);
  CHECK(a.degenerate == b.degenerate);
}
