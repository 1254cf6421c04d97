// Acceptance suite: one pass/fail line per criterion, pinned tolerances.
// Exit code 0 iff every criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nodalot/densetransport.hpp"
#include "nodalot/eigenmodel.hpp"
#include "nodalot/errors.hpp"
#include "nodalot/experiment.hpp"
#include "nodalot/fit.hpp"
#include "nodalot/grid.hpp"
#include "nodalot/growth.hpp"
#include "nodalot/massconc.hpp"
#include "nodalot/mincostflow.hpp"
#include "nodalot/nodal.hpp"
#include "nodalot/oracle1d.hpp"
#include "nodalot/transport.hpp"

using namespace nodalot;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr std::uint64_t kSeed = 7771;

// floor for the certified witness constant lower_bound * sqrt(lambda) / ||phi||_1,
// frozen from the first converged run (measured minimum 0.69 over 14 instances)
constexpr double kWitnessFloor = 0.30;

// floor for the beam mass retained outside the delta = 1/l tube at p = 4,
// fixed from a converged n = 512 reference run (ratios 0.92..0.94 there,
// 0.94..0.97 at scan resolution)
constexpr int kBeamEll[4] = {8, 16, 24, 32};
constexpr double kBeamTubeFloor = 0.30;

struct CriterionResult {
  int id = 0;
  bool pass = false;
  double seconds = 0.0;
  double budget = 0.0;
  std::string detail;
};

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point t0 = clock::now();
  return std::chrono::duration<double>(clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return std::string(buf);
}

ExperimentConfig base_config() {
  ExperimentConfig cfg = default_config();
  return cfg;
}

struct Prepared {
  Eigenfunction e;
  ScalarField f;
  NodalGeometry ng;
};

Prepared prepare(const Eigenfunction& e) {
  ExperimentConfig cfg = base_config();
  int n = resolution_for(cfg, e.manifold, e.eigenvalue);
  ScalarField f = sample(e, build_grid(e.manifold, n));
  NodalGeometry ng = extract_nodal_set(f, e.eigenvalue);
  return {e, std::move(f), std::move(ng)};
}

// ---------------------------------------------------------------- criterion 9
// brute-force LP oracle gate: 1024 one-signed cells on the circle, exact cell
// integrals, atoms at mass centroids, dense LP with circle distances
CriterionResult criterion9() {
  CriterionResult res;
  res.id = 9;
  res.budget = 120.0;
  double t0 = now_seconds();
  const int cells = 1024;
  double worst = 0.0;
  for (int k : {2, 4, 8}) {
    std::vector<double> ppos, mpos, pneg, mneg;  // positions and masses
    for (int c = 0; c < cells; ++c) {
      double a = 2 * kPi * c / cells;
      double b = 2 * kPi * (c + 1) / cells;
      double i1 = (std::cos(k * a) - std::cos(k * b)) / k;  // integral of sin(kx)
      double ix = (a * std::cos(k * a) - b * std::cos(k * b)) / k +
                  (std::sin(k * b) - std::sin(k * a)) / (k * k);
      if (std::abs(i1) < 1e-15) continue;
      double centroid = ix / i1;
      if (i1 > 0) {
        ppos.push_back(centroid);
        mpos.push_back(i1);
      } else {
        pneg.push_back(centroid);
        mneg.push_back(-i1);
      }
    }
    Eigen::MatrixXd cost(ppos.size(), pneg.size());
    for (size_t i = 0; i < ppos.size(); ++i)
      for (size_t j = 0; j < pneg.size(); ++j) {
        double d = std::abs(ppos[i] - pneg[j]);
        cost(i, j) = std::min(d, 2 * kPi - d);
      }
    Eigen::Map<const Eigen::ArrayXd> mu(mpos.data(), mpos.size());
    Eigen::Map<const Eigen::ArrayXd> nu(mneg.data(), mneg.size());
    double lp = 2 * kPi * dense_transport_cost(cost, mu, nu);
    double want = 8 * kPi / k;
    worst = std::max(worst, std::abs(lp - want) / want);
  }
  res.seconds = now_seconds() - t0;
  res.pass = worst <= 1e-4 && res.seconds <= res.budget;
  res.detail = fmt("512-atom LP vs 8pi/k, k in {2,4,8}: max rel err %.3g (<= 1e-4)", worst);
  return res;
}

// ---------------------------------------------------------------- criterion 1
CriterionResult criterion1() {
  CriterionResult res;
  res.id = 1;
  res.budget = 300.0;
  double t0 = now_seconds();
  std::vector<double> lams, w1s;
  double worst = 0.0;
  for (int k : {2, 4, 8, 16, 32}) {
    Prepared pr = prepare(make_torus_mode({{k, 0, 1.0, 0.0}}));
    TransportResult tr = w1_exact(pr.f);
    double want = 8 * kPi / k;
    worst = std::max(worst, std::abs(tr.value - want) / want);
    lams.push_back(static_cast<double>(k) * k);
    w1s.push_back(tr.value);
  }
  PowerLawFit fitted = fit_power_law(lams, w1s);
  res.seconds = now_seconds() - t0;
  bool rel_ok = worst <= 0.03;
  bool slope_ok = std::abs(fitted.exponent + 0.50) <= 0.05;
  bool r2_ok = fitted.r_squared >= 0.999;
  res.pass = rel_ok && slope_ok && r2_ok && res.seconds <= res.budget;
  res.detail = fmt("exact W1 vs 8pi/k: max rel %.4f (<= 0.03); slope %.4f (-0.50 +- 0.05); "
                   "r2 %.5f (>= 0.999)",
                   worst, fitted.exponent, fitted.r_squared);
  return res;
}

// ---------------------------------------------------------------- criterion 2
CriterionResult criterion2() {
  CriterionResult res;
  res.id = 2;
  res.budget = 600.0;
  double t0 = now_seconds();
  std::vector<Eigenfunction> instances;
  for (int k : {4, 8, 16, 32}) instances.push_back(make_torus_mode({{k, 0, 1.0, 0.0}}));
  const int combo_k[10] = {4, 5, 8, 10, 13, 16, 20, 25, 26, 32};
  for (int i = 0; i < 10; ++i)
    instances.push_back(random_torus_combination(combo_k[i] * combo_k[i], kSeed + i));
  int dual_ok = 0;
  double cmin = std::numeric_limits<double>::infinity();
  for (const Eigenfunction& e : instances) {
    Prepared pr = prepare(e);
    SignedMeasures sm = signed_measures(pr.f);
    TransportResult tr = w1_exact(pr.f, sm);
    WitnessResult wit = lipschitz_witness(pr.f, pr.ng, sm);
    if (wit.lower_bound <= tr.value * (1 + 1e-9)) ++dual_ok;
    double c = wit.lower_bound * std::sqrt(e.eigenvalue) / lp_norm(pr.f, 1.0);
    cmin = std::min(cmin, c);
  }
  res.seconds = now_seconds() - t0;
  bool duality = dual_ok == static_cast<int>(instances.size());
  res.pass = duality && cmin >= kWitnessFloor && res.seconds <= res.budget;
  res.detail = fmt("weak duality %d/%d; min witness*sqrt(lambda)/||phi||_1 = %.4f (>= %.2f)",
                   dual_ok, static_cast<int>(instances.size()), cmin, kWitnessFloor);
  return res;
}

// ------------------------------------------------------- criteria 3 and 4
struct RetRow {
  std::string family;
  double lambda = 0.0;
  double p = 0.0;
  double total = 0.0, pos = 0.0, neg = 0.0;
};

std::vector<RetRow> retention_rows() {
  std::vector<std::pair<std::string, Eigenfunction>> instances;
  for (int k : {2, 4, 8, 16, 32})
    instances.push_back({"torus_mode", make_torus_mode({{k, 0, 1.0, 0.0}})});
  int idx = 0;
  for (int lam : {25, 325, 1024})
    for (int j = 0; j < 2; ++j)
      instances.push_back({"torus_combo", random_torus_combination(lam, kSeed + 100 + idx++)});
  for (int l : {8, 16, 32}) instances.push_back({"beam", make_gaussian_beam(l)});

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<RetRow> rows;
  for (const auto& [family, e] : instances) {
    Prepared pr = prepare(e);
    double delta = 0.3 / std::sqrt(e.eigenvalue);
    RetentionReport rep = retention(pr.f, pr.ng, {delta}, {1.0, 2.0, inf});
    for (const RetentionRow& r : rep.rows)
      rows.push_back({family, e.eigenvalue, r.p, r.ratio_total, r.ratio_pos, r.ratio_neg});
  }
  return rows;
}

CriterionResult criterion3(const std::vector<RetRow>& rows, double seconds) {
  CriterionResult res;
  res.id = 3;
  res.budget = 600.0;
  res.seconds = seconds;
  double min_total = std::numeric_limits<double>::infinity();
  for (const RetRow& r : rows) min_total = std::min(min_total, r.total);
  // no degradation along lambda: per family, split rows at the median lambda
  bool halves_ok = true;
  std::string worst_family;
  double worst_ratio = std::numeric_limits<double>::infinity();
  for (const char* fam : {"torus_mode", "torus_combo", "beam"}) {
    std::vector<double> lams;
    for (const RetRow& r : rows)
      if (r.family == fam) lams.push_back(r.lambda);
    std::sort(lams.begin(), lams.end());
    lams.erase(std::unique(lams.begin(), lams.end()), lams.end());
    double split = lams[lams.size() / 2];  // first lambda of the top half
    double min_bot = std::numeric_limits<double>::infinity();
    double min_top = std::numeric_limits<double>::infinity();
    for (const RetRow& r : rows) {
      if (r.family != fam) continue;
      if (r.lambda >= split)
        min_top = std::min(min_top, r.total);
      else
        min_bot = std::min(min_bot, r.total);
    }
    double ratio = min_top / min_bot;
    if (ratio < worst_ratio) {
      worst_ratio = ratio;
      worst_family = fam;
    }
    if (min_top < 0.9 * min_bot) halves_ok = false;
  }
  res.pass = min_total >= 0.5 && halves_ok && res.seconds <= res.budget;
  res.detail = fmt("min ratio_total %.4f (>= 0.5) at delta*sqrt(lambda)=0.3, p in {1,2,inf}; "
                   "worst top/bottom min ratio %.3f (%s, >= 0.9)",
                   min_total, worst_ratio, worst_family.c_str());
  return res;
}

CriterionResult criterion4(const std::vector<RetRow>& rows) {
  CriterionResult res;
  res.id = 4;
  res.budget = 600.0;
  res.seconds = 0.0;  // shares the criterion-3 computation
  double min_signed = std::numeric_limits<double>::infinity();
  for (const RetRow& r : rows) min_signed = std::min({min_signed, r.pos, r.neg});
  res.pass = min_signed >= 0.2;
  res.detail = fmt("min of ratio_pos/ratio_neg %.4f (>= 0.2), same instances as criterion 3",
                   min_signed);
  return res;
}

// ---------------------------------------------------------------- criterion 5
CriterionResult criterion5() {
  CriterionResult res;
  res.id = 5;
  res.budget = 600.0;
  double t0 = now_seconds();
  double worst_sin = 0.0;
  for (int k : {2, 4, 8, 16, 32}) {
    Prepared pr = prepare(make_torus_mode({{k, 0, 1.0, 0.0}}));
    UncertaintyResult u = uncertainty_product(pr.f, pr.ng);
    worst_sin = std::max(worst_sin, std::abs(u.product - 4 * kPi) / (4 * kPi));
  }
  auto family_products = [](const std::vector<Eigenfunction>& es, std::vector<double>& lams,
                            std::vector<double>& prods) {
    double pmin = std::numeric_limits<double>::infinity();
    for (const Eigenfunction& e : es) {
      Prepared pr = prepare(e);
      UncertaintyResult u = uncertainty_product(pr.f, pr.ng);
      lams.push_back(e.eigenvalue);
      prods.push_back(u.product);
      pmin = std::min(pmin, u.product);
    }
    return pmin;
  };
  std::vector<Eigenfunction> beams;
  for (int l : {8, 16, 32}) beams.push_back(make_gaussian_beam(l));
  std::vector<Eigenfunction> combos;
  int idx = 0;
  for (int lam : {25, 325, 1024})
    for (int j = 0; j < 2; ++j)
      combos.push_back(random_torus_combination(lam, kSeed + 100 + idx++));
  std::vector<double> bl, bp, cl, cp;
  double beam_min = family_products(beams, bl, bp);
  double combo_min = family_products(combos, cl, cp);
  double beam_slope = fit_power_law(bl, bp).exponent;
  double combo_slope = fit_power_law(cl, cp).exponent;
  res.seconds = now_seconds() - t0;
  bool sin_ok = worst_sin <= 0.05;
  bool floor_ok = beam_min >= 1.0 && combo_min >= 1.0;
  bool slope_ok = beam_slope >= -0.05 && combo_slope >= -0.05;
  res.pass = sin_ok && floor_ok && slope_ok && res.seconds <= res.budget;
  res.detail = fmt("sin kx: max |product/4pi - 1| %.4f (<= 0.05); beams min %.2f slope %.3f, "
                   "combos min %.2f slope %.3f (mins >= 1, slopes >= -0.05)",
                   worst_sin, beam_min, beam_slope, combo_min, combo_slope);
  return res;
}

// ---------------------------------------------------------------- criterion 6
CriterionResult criterion6() {
  CriterionResult res;
  res.id = 6;
  res.budget = 300.0;
  double t0 = now_seconds();
  // reference: integral of |sin^l(theta) cos(l phi)|^p over the unit sphere
  auto reference_mass = [](int l, double p) {
    double polar = std::sqrt(kPi) * std::exp(std::lgamma(l * p / 2 + 1.0) -
                                             std::lgamma(l * p / 2 + 1.5));
    double azimuth = 2 * std::sqrt(kPi) * std::exp(std::lgamma((p + 1) / 2) -
                                                   std::lgamma(p / 2 + 1.0));
    return polar * azimuth;
  };
  double worst_spread = 0.0;
  std::vector<Prepared> beams;
  for (int l : kBeamEll) beams.push_back(prepare(make_gaussian_beam(l)));
  for (double p : {1.0, 2.0, 4.0}) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (size_t i = 0; i < beams.size(); ++i) {
      double mass = std::pow(lp_norm(beams[i].f, p), p);
      double ratio = mass / reference_mass(kBeamEll[i], p);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    worst_spread = std::max(worst_spread, hi / lo - 1.0);
  }
  // mass retained outside the delta = 1/l tube at p = 4, against the
  // converged-reference floor
  double min_ratio = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < beams.size(); ++i) {
    RetentionReport rep =
        retention(beams[i].f, beams[i].ng, {1.0 / kBeamEll[i]}, {4.0});
    min_ratio = std::min(min_ratio, rep.rows.at(0).ratio_total);
  }
  res.seconds = now_seconds() - t0;
  res.pass =
      worst_spread <= 0.05 && min_ratio >= kBeamTubeFloor && res.seconds <= res.budget;
  res.detail = fmt("gamma-ratio spread over l in {8,16,24,32}: %.4f (<= 0.05); retention "
                   "outside the delta=1/l tube at p=4: min %.4f (>= %.2f)",
                   worst_spread, min_ratio, kBeamTubeFloor);
  return res;
}

// ---------------------------------------------------------------- criterion 7
CriterionResult criterion7() {
  CriterionResult res;
  res.id = 7;
  res.budget = 900.0;
  double t0 = now_seconds();

  // (a) DF scan growth across the beam family
  std::vector<double> lams, maxes;
  for (int l : {8, 16, 32}) {
    Prepared pr = prepare(make_gaussian_beam(l));
    DoublingScanResult d = df_scan(pr.f, pr.e.eigenvalue, 200, kSeed);
    lams.push_back(pr.e.eigenvalue);
    maxes.push_back(d.max_doubling);
  }
  double df_slope = fit_power_law(lams, maxes).exponent;

  // (b) almost-monotonicity at eps = 0.1 across probe centers
  int violations = 0, mono_probes = 0, mono_skipped = 0;
  auto probe = [&](const Eigenfunction& e, const Point& x) {
    std::vector<double> radii;
    for (int i = 0; i < 5; ++i)
      radii.push_back(0.25 * std::pow(1.6, i) / std::sqrt(e.eigenvalue));
    try {
      MonotonicityReport rep = check_almost_monotonicity(e, x, radii, 0.1);
      violations += static_cast<int>(rep.violations.size());
      ++mono_probes;
    } catch (const QuadratureUnderResolved&) {
      ++mono_skipped;
    } catch (const ZeroOnBall&) {
      ++mono_skipped;
    }
  };
  Eigenfunction mode4 = make_torus_mode({{4, 0, 1.0, 0.0}});
  probe(mode4, Point(0.0, 0.7));
  probe(mode4, Point(kPi / 4, 2.1));
  probe(mode4, Point(0.4, 1.0));
  Eigenfunction combo = random_torus_combination(25, kSeed);
  probe(combo, Point(0.9, 2.2));
  probe(combo, Point(3.1, 0.4));
  probe(combo, Point(5.0, 4.0));
  Eigenfunction beam = make_gaussian_beam(8);
  probe(beam, Point(kPi / 2, 0.1));
  probe(beam, Point(kPi / 2 + 0.2, 1.2));

  // (c) sup vs L^2 doubling sandwich over 500 probes of a rich combo
  Prepared rich = prepare(random_torus_combination(325, kSeed + 3));
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> U(0.0, 2 * kPi);
  std::vector<double> xs, ys;
  double r = 2.0 / std::sqrt(rich.e.eigenvalue);
  for (int tries = 0; xs.size() < 500 && tries < 5000; ++tries) {
    Point c(U(rng), U(rng));
    try {
      double sup = doubling_exponent(rich.f, c, r);
      double l2 = lp_doubling_exponent(rich.f, c, r, 2.0);
      xs.push_back(l2);
      ys.push_back(sup);
    } catch (const ZeroOnBall&) {
    }
  }
  LinearFit sandwich = fit_linear(xs, ys);
  bool sandwich_ok = xs.size() == 500 && std::isfinite(sandwich.slope) &&
                     std::isfinite(sandwich.intercept) &&
                     std::isfinite(sandwich.residual_max) && sandwich.residual_max < 10.0;

  // (d) good-ball mass floor across d, measured multiplicity <= 16
  bool mass_ok = true;
  int worst_mult = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (const Eigenfunction& e :
       {make_torus_mode({{16, 0, 1.0, 0.0}}), make_gaussian_beam(16)}) {
    Prepared pr = prepare(e);
    Covering cov = build_covering(pr.ng);
    BallScanOptions opts;
    opts.frequency_budget = 128;
    opts.seed = kSeed;
    BallScan scan = scan_balls(pr.f, pr.e, cov, opts);
    worst_mult = std::max(worst_mult, cov.multiplicity);
    for (double d : {4.0, 6.0, 8.0, 10.0}) {
      GoodBallReport rep = classify_good_balls(pr.f, cov, scan, d);
      worst_margin = std::min(worst_margin, rep.mass_fraction_good - rep.mass_bound);
      if (rep.mass_fraction_good < rep.mass_bound) mass_ok = false;
    }
  }

  res.seconds = now_seconds() - t0;
  res.pass = df_slope <= 0.6 && violations == 0 && mono_probes >= 6 && sandwich_ok &&
             mass_ok && worst_mult <= 16 && res.seconds <= res.budget;
  res.detail = fmt("DF slope %.3f (<= 0.6); monotonicity violations %d on %d probes "
                   "(%d skipped); sandwich N_sup = %.2f*N_2 + %.2f, max residual %.2f on 500 "
                   "probes; good-ball margin %.4f (>= 0), multiplicity %d (<= 16)",
                   df_slope, violations, mono_probes, mono_skipped, sandwich.slope,
                   sandwich.intercept, sandwich.residual_max, worst_margin, worst_mult);
  return res;
}

// ---------------------------------------------------------------- criterion 8
CriterionResult criterion8() {
  CriterionResult res;
  res.id = 8;
  res.budget = 60.0;
  double t0 = now_seconds();
  std::vector<std::string> fails;
  auto expect = [&](bool ok, const char* what) {
    if (!ok) fails.push_back(what);
  };

  // harmonic polynomial lift anchor
  FlatLiftField deg1{[](const Eigen::Vector3d& p) { return p.x(); },
                     [](const Eigen::Vector3d&) { return 1.0; }};
  LiftFrequency lf = flat_lift_frequency(deg1, Eigen::Vector3d(0.0, 0.4, -0.3), 0.7);
  expect(std::abs(lf.N - 1.0) <= 1e-2, "degree-1 lift frequency");
  expect(std::abs(lf.Ntilde - 1.0) <= 1e-2, "degree-1 dirichlet frequency");

  // two-atom optimal transport, dense and on a graph
  Eigen::MatrixXd c2(2, 2);
  c2 << 0.3, 1.0, 0.9, 0.2;
  Eigen::ArrayXd a(2), b(2);
  a << 0.4, 0.6;
  b << 0.5, 0.5;
  expect(std::abs(dense_transport_cost(c2, a, b) - 0.31) <= 1e-12, "two-atom dense OT");
  Eigen::ArrayXd sup(2);
  sup << 0.7, -0.7;
  FlowResult flow = min_cost_flow(2, {{0, 1, 0.7}}, sup);
  expect(std::abs(flow.cost - 0.49) <= 1e-12, "two-atom graph OT");

  // delta = 0 retention
  Eigenfunction e4 = make_torus_mode({{4, 0, 1.0, 0.0}});
  ScalarField f4 = sample(e4, build_grid(e4.manifold, 96));
  NodalGeometry ng4 = extract_nodal_set(f4, e4.eigenvalue);
  RetentionReport rep0 = retention(f4, ng4, {0.0}, {1.0});
  expect(std::abs(rep0.rows.at(0).ratio_total - 1.0) <= 1e-12, "zero-delta retention");

  // closed-form anchors
  Manifold torus = Manifold::flat_torus(2 * kPi, 2 * kPi);
  expect(std::abs(torus.distance(Point(0.0, 0.0), Point(2 * kPi - 0.3, 2 * kPi - 0.4)) - 0.5) <=
             1e-12,
         "torus wrap distance");
  Manifold sphere = Manifold::round_sphere(2.0);
  expect(std::abs(sphere.distance(Point(0.0, 0.0), Point(kPi / 2, 1.1)) - kPi) <= 1e-12,
         "sphere polar arc");
  expect(make_torus_mode({{3, 0, 1.0, 0.0}}).eigenvalue == 9.0, "sin(3x) eigenvalue");
  expect(make_gaussian_beam(8).eigenvalue == 72.0, "beam eigenvalue");
  bool threw = false;
  try {
    make_torus_mode({{1, 0, 1.0, 0.0}, {2, 0, 1.0, 0.0}});
  } catch (const MixedEigenvalue&) {
    threw = true;
  }
  expect(threw, "mixed eigenvalue rejection");
  threw = false;
  try {
    random_torus_combination(3, 1);
  } catch (const std::invalid_argument&) {
    threw = true;
  }
  expect(threw, "lambda=3 has no representation");

  // nodal anchors on sin(x)
  Eigenfunction e1 = make_torus_mode({{1, 0, 1.0, 0.0}});
  ScalarField f1 = sample(e1, build_grid(e1.manifold, 96));
  NodalGeometry ng1 = extract_nodal_set(f1, e1.eigenvalue);
  expect(std::abs(ng1.total_length - 4 * kPi) <= 1e-6 * 4 * kPi, "sin(x) nodal length");
  expect(ng1.domain_count == 2, "sin(x) domain count");

  // config and fit anchors
  threw = false;
  try {
    parse_config(R"({"family": {"torus_k": [], "beam_l": [], "combo_lambda": []}})");
  } catch (const ConfigInvalid&) {
    threw = true;
  }
  expect(threw, "empty family rejection");
  ExperimentConfig mini = base_config();
  mini.family.torus_k = {2};
  mini.family.beam_l = {};
  mini.family.combo_lambda = {};
  expect(render_csv(scan_w1(mini)) == render_csv(scan_w1(mini)), "byte-identical rerun");
  std::vector<double> px{1.0, 4.0, 9.0, 25.0}, py;
  for (double v : px) py.push_back(7.0 * std::pow(v, -0.5));
  PowerLawFit pf = fit_power_law(px, py);
  expect(std::abs(pf.exponent + 0.5) <= 1e-12 && pf.r_squared >= 1.0 - 1e-12,
         "synthetic power law");
  threw = false;
  try {
    fit_power_law({1.0, 2.0}, {1.0, 0.0});
  } catch (const NonPositiveValue&) {
    threw = true;
  }
  expect(threw, "nonpositive fit rejection");
  expect(std::abs(w1_oracle_circle([](double x) { return std::sin(4 * x); }, 2 * kPi, 2 * kPi) -
                  2 * kPi) <= 1e-6 * 2 * kPi,
         "circle oracle k=4");

  res.seconds = now_seconds() - t0;
  res.pass = fails.empty() && res.seconds <= res.budget;
  if (fails.empty()) {
    res.detail = "lift degree-1, two-atom OT, zero-delta retention and 10 closed-form "
                 "anchors all exact";
  } else {
    res.detail = "failed: ";
    for (size_t i = 0; i < fails.size(); ++i)
      res.detail += (i ? ", " : "") + fails[i];
  }
  return res;
}

}  // namespace

int main() {
  int passed = 0, emitted = 0;
  auto emit = [&](const CriterionResult& r) {
    if (r.pass) ++passed;
    ++emitted;
    std::printf("[ACCEPT] criterion-%d %s %s; %.1fs (budget %.0fs)\n", r.id,
                r.pass ? "PASS" : "FAIL", r.detail.c_str(), r.seconds, r.budget);
    std::fflush(stdout);
  };
  // any escaped exception fails the criterion instead of killing the run
  auto guarded = [&](int id, double budget, const std::function<CriterionResult()>& run) {
    try {
      emit(run());
    } catch (const std::exception& ex) {
      CriterionResult res;
      res.id = id;
      res.budget = budget;
      res.detail = fmt("unexpected exception: %s", ex.what());
      emit(res);
    }
  };
  // the oracle gate runs first: nothing downstream is trusted without it
  CriterionResult gate;
  guarded(9, 120.0, [&] {
    gate = criterion9();
    return gate;
  });
  if (gate.pass) {
    guarded(1, 300.0, criterion1);
    guarded(2, 600.0, criterion2);
    double t0 = now_seconds();
    std::vector<RetRow> rows;
    std::string rows_err;
    try {
      rows = retention_rows();
    } catch (const std::exception& ex) {
      rows_err = ex.what();
    }
    double shared = now_seconds() - t0;
    if (rows_err.empty()) {
      guarded(3, 600.0, [&] { return criterion3(rows, shared); });
      guarded(4, 600.0, [&] { return criterion4(rows); });
    } else {
      CriterionResult bad;
      bad.budget = 600.0;
      bad.seconds = shared;
      bad.detail = fmt("unexpected exception: %s", rows_err.c_str());
      bad.id = 3;
      emit(bad);
      bad.id = 4;
      emit(bad);
    }
    guarded(5, 600.0, criterion5);
    guarded(6, 300.0, criterion6);
    guarded(7, 900.0, criterion7);
    guarded(8, 60.0, criterion8);
  }
  bool all = passed == 9 && emitted == 9;
  std::printf("[ACCEPT] %d/9 criteria passed: %s\n", passed, all ? "OK" : "FAILURE");
  return all ? 0 : 1;
}
