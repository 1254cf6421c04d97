#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nodalot/field.hpp"
#include "nodalot/nodal.hpp"

namespace nodalot {

struct DiscreteMeasure {
  std::vector<int> nodes;
  Eigen::ArrayXd masses;
  double total = 0.0;
};

struct SignedMeasures {
  DiscreteMeasure pos;
  DiscreteMeasure neg;    // rescaled so neg.total == pos.total exactly
  double imbalance = 0.0; // relative quadrature mismatch before rescaling
};

// Splits phi dx into mu = phi^+ dx and nu = phi^- dx (atomized on the grid).
// Requires a numerically zero mean; throws OneSignedField if a sign is absent.
SignedMeasures signed_measures(const ScalarField& f);

struct TransportResult {
  std::string method;
  double value = 0.0;
  double lower_bound = 0.0;   // best certified duality bound, when computed
  double marginal_err = 0.0;  // mass defect of the realized plan/flow
  double imbalance = 0.0;
  std::uint64_t seed = 0;
  int atoms = 0;
};

// Exact W1(mu, nu) as an uncapacitated min-cost flow on the grid graph with
// geodesic edge lengths (the Beckmann formulation of W1).
TransportResult w1_exact(const ScalarField& f);
TransportResult w1_exact(const ScalarField& f, const SignedMeasures& sm);

struct SinkhornRunOptions {
  int target_atoms = 1000;  // per side, systematic resampling above this
  std::uint64_t seed = 0;
  double eps_start_factor = 0.5;   // x mean atom spacing
  double eps_final_factor = 0.005;
  int stages = 6;
  int iters_per_stage = 200;
  double marginal_tol = 1e-4;
};

// Entropic W1 on subsampled atoms with true geodesic costs.
TransportResult w1_sinkhorn(const ScalarField& f, const SignedMeasures& sm,
                            const SinkhornRunOptions& opts = {});

// Systematic (stratified) resampling preserving total mass exactly.
DiscreteMeasure subsample_measure(const DiscreteMeasure& mu, int target, std::uint64_t seed);

struct WitnessResult {
  Eigen::ArrayXd field;      // witness per grid node, normalized to edge slope 1
  double lower_bound = 0.0;  // integral of the witness against mu - nu
  double lipschitz = 0.0;    // measured edge slope before normalization
  bool deflated = false;     // raw field exceeded slope 1 and was shrunk
  double radius = 0.0;       // separation scale R
  double tube_width = 0.0;   // R/2
};

// Explicit graph-Lipschitz witness built from R (dZ - dY) / (4 (dZ + dY))
// where Y, Z are the off-tube positivity/negativity regions, rescaled to
// graph slope exactly 1; the bound lower_bound <= W1 is then exact on the
// grid graph by Kantorovich duality.  radius = 0 picks R = min over signs of
// the farthest sample from the nodal set.  Throws EmptySignedRegion when a
// sign has no off-tube samples.
WitnessResult lipschitz_witness(const ScalarField& f, const NodalGeometry& ng,
                                const SignedMeasures& sm, double radius = 0.0);

struct UncertaintyResult {
  double lambda = 0.0;
  double w1 = 0.0;
  double l1 = 0.0;           // ||phi||_{L^1}
  double nodal_length = 0.0;
  double product = 0.0;      // (w1 / l1) * nodal_length
};

// Transport-length uncertainty product; scale-invariant and ~constant across
// separated-variable modes.
UncertaintyResult uncertainty_product(const ScalarField& f, const NodalGeometry& ng,
                                      bool exact = true,
                                      const SinkhornRunOptions& opts = {});

std::string transport_result_to_json(const TransportResult& r);

}  // namespace nodalot
