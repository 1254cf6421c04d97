#include "nodalot/growth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_set>

#include "nodalot/errors.hpp"
#include "nodalot/grid.hpp"
#include "nodalot/quadrature.hpp"

namespace nodalot {

namespace {

constexpr double kPi = 3.14159265358979323846;

double ball_sup(const ScalarField& f, const std::vector<int>& ids) {
  double s = 0.0;
  for (int id : ids) s = std::max(s, std::abs(f.values[id]));
  return s;
}

double ball_mass(const ScalarField& f, const std::vector<int>& ids, double p) {
  double acc = 0.0;
  for (int id : ids) acc += f.grid->weights[id] * std::pow(std::abs(f.values[id]), p);
  return acc;
}

void check_doubling_pre(const ScalarField& f, double r) {
  const double h = f.grid->spacing;
  if (r < h) throw std::invalid_argument("doubling exponent: r below the mesh size");
  if (r > f.grid->manifold.diameter())
    throw std::invalid_argument("doubling exponent: r above the manifold diameter");
}

void check_inner_sup(const ScalarField& f, double inner_sup) {
  if (inner_sup < 1e-14 * field_max_abs(f))
    throw ZeroOnBall("doubling exponent: field vanishes on the inner ball");
}

// Quadrature driver shared by every lift variant.  The sampler reports u^2 and
// |grad u|^2 at spherical coordinates (s, alpha, omega) around the lift center;
// jac_over_sin is the area Jacobian of the geodesic sphere divided by
// sin(alpha), smooth in cos(alpha) so Gauss nodes in c = cos(alpha) converge.
struct LiftSampler {
  std::function<void(double s, double cos_a, double sin_a, double omega, double& u2,
                     double& gsq)>
      at;
  std::function<double(double s, double sin_a)> jac_over_sin;
  double max_radius = std::numeric_limits<double>::infinity();
};

struct SurfacePair {
  double u2 = 0.0;
  double gsq = 0.0;
};

SurfacePair integrate_surface(const LiftSampler& sampler, double s, const GaussRule& polar,
                              int n_az) {
  SurfacePair acc;
  const double w_az = 2.0 * kPi / n_az;
  for (Eigen::Index ic = 0; ic < polar.nodes.size(); ++ic) {
    const double c = polar.nodes[ic];
    const double sa = std::sqrt(std::max(0.0, 1.0 - c * c));
    const double jw = polar.weights[ic] * w_az * sampler.jac_over_sin(s, sa);
    for (int io = 0; io < n_az; ++io) {
      const double omega = (io + 0.5) * w_az;
      double u2 = 0.0, gsq = 0.0;
      sampler.at(s, c, sa, omega, u2, gsq);
      acc.u2 += jw * u2;
      acc.gsq += jw * gsq;
    }
  }
  return acc;
}

LiftFrequency eval_frequency(const LiftSampler& sampler, double r, int polar_n, int az_n,
                             int rad_n, double step_frac) {
  const GaussRule polar = gauss_legendre(polar_n, -1.0, 1.0);
  LiftFrequency out;
  out.r = r;
  out.H = integrate_surface(sampler, r, polar, az_n).u2;
  const double dr = step_frac * r;
  out.Hprime = (integrate_surface(sampler, r + dr, polar, az_n).u2 -
                integrate_surface(sampler, r - dr, polar, az_n).u2) /
               (2.0 * dr);
  const GaussRule radial = gauss_legendre(rad_n, 0.0, r);
  for (Eigen::Index i = 0; i < radial.nodes.size(); ++i)
    out.D += radial.weights[i] * integrate_surface(sampler, radial.nodes[i], polar, az_n).gsq;
  if (out.H < 1e-300) {
    out.N = out.Ntilde = std::numeric_limits<double>::infinity();
    return out;
  }
  // Degree-style normalization: a degree-g homogeneous harmonic function in the
  // 3-D lift gives r H'/(2H) = g + 1, so subtract 1 to anchor degree 1 at 1.
  out.N = r * out.Hprime / (2.0 * out.H) - 1.0;
  out.Ntilde = r * out.D / out.H;
  return out;
}

LiftFrequency run_lift(const LiftSampler& sampler, double r, const LiftOptions& o) {
  if (!(r > 0.0)) throw std::invalid_argument("lift frequency: r must be positive");
  if (r * (1.0 + o.step_fraction) >= sampler.max_radius)
    throw std::invalid_argument("lift frequency: r too large for the lift chart");
  const LiftFrequency base =
      eval_frequency(sampler, r, o.polar_nodes, o.azimuth_nodes, o.radial_nodes, o.step_fraction);
  if (!std::isfinite(base.N))
    throw ZeroOnBall("lift frequency: boundary energy vanishes on the sphere");
  if (!o.check_refinement) return base;
  const LiftFrequency fine = eval_frequency(sampler, r, 2 * o.polar_nodes, 2 * o.azimuth_nodes,
                                            2 * o.radial_nodes, o.step_fraction);
  if (std::abs(fine.N - base.N) > o.refine_tol * std::max(1.0, std::abs(base.N)))
    throw QuadratureUnderResolved("lift frequency: refinement moved N from " +
                                  std::to_string(base.N) + " to " + std::to_string(fine.N));
  return fine;
}

LiftSampler make_eigen_sampler(const Eigenfunction& e, const Point& x) {
  const Manifold& m = e.manifold;
  const double lambda = e.eigenvalue;
  const double sq = std::sqrt(lambda);
  LiftSampler s;
  if (m.is_torus()) {
    s.max_radius = 0.4999 * std::min(m.lx(), m.ly());
    s.jac_over_sin = [](double r, double) { return r * r; };
    s.at = [&e, x, lambda, sq](double r, double c, double sa, double omega, double& u2,
                               double& gsq) {
      const Point p(x.x() + r * sa * std::cos(omega), x.y() + r * sa * std::sin(omega));
      const double scale = std::exp(2.0 * sq * r * c);
      const double phi = evaluate(e, p);
      u2 = scale * phi * phi;
      gsq = scale * (gradient(e, p).squaredNorm() + lambda * phi * phi);
    };
  } else {
    const double rad = m.radius();
    s.max_radius = 0.999 * kPi * rad;
    s.jac_over_sin = [rad](double r, double sa) {
      if (sa < 1e-9) return r * r;
      return r * rad * std::sin(r * sa / rad) / sa;
    };
    s.at = [&e, x, lambda, sq, rad](double r, double c, double sa, double omega, double& u2,
                                    double& gsq) {
      Point y = sphere_exp(e.manifold, x, omega, r * sa);
      // Keep strictly off the poles so the coordinate frame stays regular.
      y.x() = std::clamp(y.x(), 1e-9, kPi - 1e-9);
      const double scale = std::exp(2.0 * sq * r * c);
      const double phi = evaluate(e, y);
      u2 = scale * phi * phi;
      gsq = scale * (gradient(e, y).squaredNorm() + lambda * phi * phi);
    };
  }
  return s;
}

}  // namespace

double doubling_exponent(const ScalarField& f, const Point& center, double r) {
  check_doubling_pre(f, r);
  const double s1 = ball_sup(f, metric_ball(*f.grid, center, r));
  check_inner_sup(f, s1);
  const double s2 = ball_sup(f, metric_ball(*f.grid, center, 2.0 * r));
  return std::log(s2 / s1);
}

double lp_doubling_exponent(const ScalarField& f, const Point& center, double r, double p) {
  if (!(p >= 1.0) || std::isinf(p))
    throw std::invalid_argument("lp_doubling_exponent: p must be finite and >= 1");
  check_doubling_pre(f, r);
  const auto inner = metric_ball(*f.grid, center, r);
  check_inner_sup(f, ball_sup(f, inner));
  const double m1 = ball_mass(f, inner, p);
  const double m2 = ball_mass(f, metric_ball(*f.grid, center, 2.0 * r), p);
  if (m1 <= 0.0) throw ZeroOnBall("lp_doubling_exponent: zero mass on the inner ball");
  return std::log(m2 / m1);
}

LiftFrequency flat_lift_frequency(const FlatLiftField& u, const Eigen::Vector3d& center,
                                  double r, const LiftOptions& opts) {
  LiftSampler s;
  s.jac_over_sin = [](double rr, double) { return rr * rr; };
  s.at = [&u, &center](double rr, double c, double sa, double omega, double& u2, double& gsq) {
    const Eigen::Vector3d p =
        center + rr * Eigen::Vector3d(sa * std::cos(omega), sa * std::sin(omega), c);
    const double v = u.value(p);
    u2 = v * v;
    gsq = u.grad_sq(p);
  };
  return run_lift(s, r, opts);
}

LiftFrequency lift_frequency(const Eigenfunction& e, const Point& x, double r,
                             const LiftOptions& opts) {
  return run_lift(make_eigen_sampler(e, x), r, opts);
}

MonotonicityReport check_almost_monotonicity(const Eigenfunction& e, const Point& x,
                                             const std::vector<double>& radii, double eps,
                                             const LiftOptions& opts) {
  if (radii.size() < 2) throw std::invalid_argument("monotonicity: need at least two radii");
  if (!std::is_sorted(radii.begin(), radii.end()))
    throw std::invalid_argument("monotonicity: radii must be increasing");
  MonotonicityReport rep;
  rep.radii = radii;
  for (double r : radii) rep.frequencies.push_back(lift_frequency(e, x, r, opts).N);
  // 1% multiplicative slack absorbs the certified quadrature error.
  constexpr double kSlack = 1.01;
  for (size_t a = 0; a < radii.size(); ++a) {
    for (size_t b = a + 1; b < radii.size(); ++b) {
      MonotonicityPair pair{radii[a], radii[b], rep.frequencies[a], rep.frequencies[b]};
      rep.values.push_back(pair);
      if (pair.n1 > (1.0 + eps) * pair.n2 * kSlack + 1e-9) rep.violations.push_back(pair);
    }
  }
  return rep;
}

NeighborFrequencyResult neighbor_frequency_check(const Eigenfunction& e, const Point& x1,
                                                 const Point& x2, double tau, double cstar,
                                                 double floor, const LiftOptions& opts) {
  if (cstar < 1.0) throw std::invalid_argument("neighbor check: cstar must be >= 1");
  if (e.manifold.distance(x1, x2) >= tau)
    throw std::invalid_argument("neighbor check: centers must be within tau");
  NeighborFrequencyResult out;
  out.n1 = lift_frequency(e, x1, tau, opts).N;
  out.n2 = lift_frequency(e, x2, cstar * tau, opts).N;
  out.applicable = std::min(out.n1, out.n2) >= floor;
  out.passed = !out.applicable || out.n2 > 0.99 * out.n1;
  return out;
}

Covering build_covering(const NodalGeometry& ng, double r0, int mult_cap) {
  const SampleGrid& g = *ng.grid;
  const Manifold& m = g.manifold;
  const double r = r0 / std::sqrt(ng.eigenvalue);
  if (r < 3.0 * g.spacing)
    throw std::invalid_argument("build_covering: ball radius must be >= 3 mesh steps");

  // Lattice spacing 1.05 r with shift budget 0.2 r: cell half-diagonal plus the
  // worst shift stays below r (coverage) while doubled balls meet at most ~16
  // lattice cells (multiplicity); both facts are re-checked exactly below.
  const double a = 1.05 * r;
  const double shift_cap = 0.2 * r;

  std::vector<Point> centers;
  if (m.is_torus()) {
    const int np = std::max(1, static_cast<int>(std::ceil(m.ly() / a)));
    const int nq = std::max(1, static_cast<int>(std::ceil(m.lx() / a)));
    for (int p = 0; p < np; ++p)
      for (int q = 0; q < nq; ++q)
        centers.emplace_back((q + 0.5) * m.lx() / nq, (p + 0.5) * m.ly() / np);
  } else {
    const double rad = m.radius();
    const int np = std::max(1, static_cast<int>(std::ceil(kPi * rad / a)));
    for (int p = 0; p < np; ++p) {
      const double theta = (p + 0.5) * kPi / np;
      const double circ = 2.0 * kPi * rad * std::sin(theta);
      int nq = std::max(1, static_cast<int>(std::ceil(circ / a)));
      // Avoid crowding short polar rings: widen spacing toward a when possible.
      if (nq >= 2 && circ / nq < 0.7 * a)
        nq = std::max(1, static_cast<int>(std::floor(circ / (0.7 * a))));
      for (int q = 0; q < nq; ++q) centers.emplace_back(theta, (q + 0.5) * 2.0 * kPi / nq);
    }
  }

  Covering cov;
  cov.r = r;
  std::unordered_set<int> moved_nodes;
  for (const Point& c : centers) {
    CoverBall ball;
    ball.center = c;
    ball.center_node = nearest_node(g, c);
    ball.r = r;
    if (ng.distance[ball.center_node] <= 0.5 * r) {
      ball.deep = true;
    } else {
      // Pull the center toward the nodal set, bounded so coverage survives.
      const auto window = metric_ball(g, c, shift_cap);
      int best = ball.center_node;
      for (int id : window)
        if (ng.distance[id] < ng.distance[best]) best = id;
      if (best != ball.center_node) {
        if (!moved_nodes.insert(best).second) continue;  // another ball owns this node
        ball.center = g.node(best);
        ball.center_node = best;
      }
      ball.deep = ng.distance[best] <= 0.5 * r;
    }
    ball.index = static_cast<int>(cov.balls.size());
    cov.balls.push_back(ball);
  }

  std::vector<int> cover_count(static_cast<size_t>(g.node_count()), 0);
  std::vector<int> double_count(static_cast<size_t>(g.node_count()), 0);
  for (const CoverBall& b : cov.balls) {
    for (int id : metric_ball(g, b.center, r)) ++cover_count[static_cast<size_t>(id)];
    for (int id : metric_ball(g, b.center, 2.0 * r)) ++double_count[static_cast<size_t>(id)];
  }
  const int uncovered =
      static_cast<int>(std::count(cover_count.begin(), cover_count.end(), 0));
  if (uncovered > 0)
    throw CoverageGap("build_covering: " + std::to_string(uncovered) +
                      " grid nodes uncovered; increase r0 relative to the density constant");
  cov.multiplicity = *std::max_element(double_count.begin(), double_count.end());
  if (cov.multiplicity > mult_cap)
    throw Error("build_covering: doubled-ball multiplicity " +
                std::to_string(cov.multiplicity) + " exceeds cap " + std::to_string(mult_cap));
  return cov;
}

BallScan scan_balls(const ScalarField& f, const Eigenfunction& e, const Covering& cov,
                    const BallScanOptions& opts) {
  BallScan scan;
  scan.p = opts.p;
  scan.multiplicity = cov.multiplicity;
  const SampleGrid& g = *f.grid;
  for (const CoverBall& b : cov.balls) {
    BallScanRow row;
    row.index = b.index;
    row.center = b.center;
    row.r = b.r;
    row.deep = b.deep;
    const double m1 = ball_mass(f, metric_ball(g, b.center, b.r), opts.p);
    const double m2 = ball_mass(f, metric_ball(g, b.center, 2.0 * b.r), opts.p);
    row.np_ratio = m1 > 0.0 ? m2 / m1 : std::numeric_limits<double>::infinity();
    scan.rows.push_back(row);
  }

  std::vector<int> picks(scan.rows.size());
  for (size_t i = 0; i < picks.size(); ++i) picks[i] = static_cast<int>(i);
  if (static_cast<int>(picks.size()) > opts.frequency_budget) {
    std::mt19937_64 eng(opts.seed);
    std::shuffle(picks.begin(), picks.end(), eng);
    picks.resize(static_cast<size_t>(opts.frequency_budget));
    std::sort(picks.begin(), picks.end());
  }
  for (int idx : picks) {
    ++scan.frequency_samples;
    try {
      scan.rows[static_cast<size_t>(idx)].n_lift =
          lift_frequency(e, scan.rows[static_cast<size_t>(idx)].center,
                         scan.rows[static_cast<size_t>(idx)].r, opts.lift)
              .N;
    } catch (const QuadratureUnderResolved&) {
      ++scan.frequency_failures;
    } catch (const ZeroOnBall&) {
      ++scan.frequency_failures;
    }
  }
  return scan;
}

GoodBallReport classify_good_balls(const ScalarField& f, const Covering& cov,
                                   const BallScan& scan, double d) {
  if (cov.balls.size() != scan.rows.size())
    throw std::invalid_argument("classify_good_balls: scan does not match covering");
  GoodBallReport rep;
  rep.d = d;
  rep.p = scan.p;
  rep.multiplicity = scan.multiplicity;
  const double ratio_cap = std::pow(2.0, d);
  const SampleGrid& g = *f.grid;
  std::vector<char> good_union(static_cast<size_t>(g.node_count()), 0);
  int good_count = 0;
  for (const BallScanRow& row : scan.rows) {
    const bool good = row.np_ratio <= ratio_cap;
    rep.good_doubling.push_back(good ? 1 : 0);
    if (std::isnan(row.n_lift))
      rep.good_frequency.push_back(-1);
    else
      rep.good_frequency.push_back(row.n_lift <= d ? 1 : 0);
    if (good) {
      ++good_count;
      for (int id : metric_ball(g, row.center, row.r)) good_union[static_cast<size_t>(id)] = 1;
    }
  }
  rep.ball_fraction_good =
      scan.rows.empty() ? 0.0 : static_cast<double>(good_count) / scan.rows.size();
  double mass_in = 0.0, mass_total = 0.0;
  for (int id = 0; id < g.node_count(); ++id) {
    const double cell = g.weights[id] * std::pow(std::abs(f.values[id]), scan.p);
    mass_total += cell;
    if (good_union[static_cast<size_t>(id)]) mass_in += cell;
  }
  rep.mass_fraction_good = mass_total > 0.0 ? mass_in / mass_total : 0.0;
  rep.mass_bound = std::max(0.0, 1.0 - scan.multiplicity * std::pow(2.0, -d));
  return rep;
}

DoublingScanResult df_scan(const ScalarField& f, double lambda, int probes, std::uint64_t seed,
                           double ball_coeff) {
  if (probes < 1) throw std::invalid_argument("df_scan: need at least one probe");
  DoublingScanResult out;
  out.lambda = lambda;
  const double r = ball_coeff / std::sqrt(lambda);
  std::mt19937_64 eng(seed);
  const int n = f.grid->node_count();
  double sum = 0.0;
  int used = 0;
  for (int k = 0; k < probes; ++k) {
    const int id = static_cast<int>(eng() % static_cast<std::uint64_t>(n));
    try {
      const double nd = doubling_exponent(f, f.grid->node(id), r);
      out.max_doubling = std::max(out.max_doubling, nd);
      sum += nd;
      ++used;
    } catch (const ZeroOnBall&) {
      ++out.degenerate;
    }
  }
  out.probes = used;
  if (used > 0) out.mean_doubling = sum / used;
  return out;
}

}  // namespace nodalot
