#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "nodalot/eigenmodel.hpp"
#include "nodalot/field.hpp"
#include "nodalot/nodal.hpp"

namespace nodalot {

// log of the sup ratio between the doubled and the base metric ball.
// Throws ZeroOnBall when the field is numerically zero on the inner ball.
double doubling_exponent(const ScalarField& f, const Point& center, double r);

// log of the L^p mass ratio (p-th powers) between the doubled and base ball.
double lp_doubling_exponent(const ScalarField& f, const Point& center, double r, double p);

struct LiftFrequency {
  double r = 0.0;
  double H = 0.0;       // boundary integral of u^2 over the lifted sphere
  double Hprime = 0.0;  // central-difference derivative of H
  double D = 0.0;       // Dirichlet energy of u over the lifted ball
  double N = 0.0;       // r H'/(2H) - 1  (degree-style normalization in 3-D)
  double Ntilde = 0.0;  // r D / H
};

struct LiftOptions {
  int polar_nodes = 16;          // Gauss nodes in cos(alpha)
  int azimuth_nodes = 24;        // uniform nodes in the azimuth
  int radial_nodes = 24;         // Gauss nodes for the volume integral
  double step_fraction = 0.02;   // H' step = step_fraction * r
  bool check_refinement = true;  // re-run at double order, compare N
  double refine_tol = 1e-2;
};

// Field on a 3-D half-space lift: u and |grad u|^2 at local coordinates.
struct FlatLiftField {
  std::function<double(const Eigen::Vector3d&)> value;
  std::function<double(const Eigen::Vector3d&)> grad_sq;
};

// Frequency data of an arbitrary field over a Euclidean ball (test harness
// entry point; also the torus path of lift_frequency).  Throws ZeroOnBall
// when the boundary energy H vanishes.
LiftFrequency flat_lift_frequency(const FlatLiftField& u, const Eigen::Vector3d& center,
                                  double r, const LiftOptions& opts = {});

// Frequency data of the harmonic lift u = e^{sqrt(lambda) t} phi over the
// geodesic ball of radius r centred at (x, 0) in M x R.
LiftFrequency lift_frequency(const Eigenfunction& e, const Point& x, double r,
                             const LiftOptions& opts = {});

struct MonotonicityPair {
  double r1 = 0.0, r2 = 0.0;
  double n1 = 0.0, n2 = 0.0;
};

struct MonotonicityReport {
  std::vector<MonotonicityPair> values;      // all ordered pairs inspected
  std::vector<MonotonicityPair> violations;  // N(r1) > (1+eps) N(r2) beyond slack
  std::vector<double> radii;
  std::vector<double> frequencies;
};

// Almost-monotonicity of r -> N(x, r): flags pairs r1 < r2 with
// N(r1) > (1 + eps) * N(r2) * (1 + slack).
MonotonicityReport check_almost_monotonicity(const Eigenfunction& e, const Point& x,
                                             const std::vector<double>& radii, double eps,
                                             const LiftOptions& opts = {});

struct NeighborFrequencyResult {
  bool applicable = false;  // N(x1, tau) reached the activation floor
  bool passed = true;
  double n1 = 0.0;  // N(x1, tau)
  double n2 = 0.0;  // N(x2, cstar * tau)
};

// Frequency at a nearby center dominates: N(x2, cstar*tau) > 0.99 N(x1, tau)
// whenever N(x1, tau) >= floor.
NeighborFrequencyResult neighbor_frequency_check(const Eigenfunction& e, const Point& x1,
                                                 const Point& x2, double tau,
                                                 double cstar = 4.0, double floor = 10.0,
                                                 const LiftOptions& opts = {});

struct CoverBall {
  int index = 0;
  Point center = Point::Zero();
  int center_node = -1;
  double r = 0.0;
  bool deep = false;  // center sits within r/2 of the nodal set
};

struct Covering {
  double r = 0.0;        // common ball radius r0 / sqrt(lambda)
  int multiplicity = 0;  // max overlap count of the doubled balls
  std::vector<CoverBall> balls;
};

// Lattice covering of the manifold by balls of radius r0/sqrt(lambda); centers
// are pulled toward the nodal set (by at most 0.2 r, preserving coverage) when
// their half-ball misses it.  Throws CoverageGap if any grid node escapes all
// balls and Error if the doubled-ball multiplicity exceeds mult_cap.
Covering build_covering(const NodalGeometry& ng, double r0 = 2.0, int mult_cap = 16);

struct BallScanRow {
  int index = 0;
  Point center = Point::Zero();
  double r = 0.0;
  double np_ratio = 0.0;  // 2^{N_p}: L^p mass of 2B over B (p-th powers)
  double n_lift = std::numeric_limits<double>::quiet_NaN();  // sampled subset only
  bool deep = false;
};

struct BallScanOptions {
  double p = 2.0;
  int frequency_budget = 512;  // max lift-frequency evaluations
  std::uint64_t seed = 0;
  LiftOptions lift;
};

struct BallScan {
  double p = 2.0;
  int multiplicity = 0;
  int frequency_samples = 0;
  int frequency_failures = 0;  // lift quadrature refused to certify
  std::vector<BallScanRow> rows;
};

// Threshold-free pass: L^p doubling ratio for every ball, lifted frequency for
// a seeded subsample of at most frequency_budget balls.
BallScan scan_balls(const ScalarField& f, const Eigenfunction& e, const Covering& cov,
                    const BallScanOptions& opts = {});

struct GoodBallReport {
  double d = 0.0;
  double p = 2.0;
  int multiplicity = 0;
  std::vector<char> good_doubling;        // np_ratio <= 2^d
  std::vector<signed char> good_frequency;  // 1 / 0 / -1 when not sampled
  double ball_fraction_good = 0.0;
  double mass_fraction_good = 0.0;  // ||phi||_p^p share of the union of good balls
  double mass_bound = 0.0;          // guaranteed floor 1 - multiplicity * 2^{-d}
};

// Thresholded view of a scan at doubling bound d.
GoodBallReport classify_good_balls(const ScalarField& f, const Covering& cov,
                                   const BallScan& scan, double d);

struct DoublingScanResult {
  double lambda = 0.0;
  int probes = 0;
  int degenerate = 0;  // probes whose inner ball carried no field mass
  double max_doubling = 0.0;
  double mean_doubling = 0.0;
};

// Sup-doubling exponents at random centers with r = ball_coeff / sqrt(lambda).
DoublingScanResult df_scan(const ScalarField& f, double lambda, int probes, std::uint64_t seed,
                           double ball_coeff = 2.0);

}  // namespace nodalot
