#include "nodalot/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "json.hpp"
#include "nodalot/densetransport.hpp"
#include "nodalot/errors.hpp"
#include "nodalot/grid.hpp"
#include "nodalot/mincostflow.hpp"
#include "nodalot/sinkhorn.hpp"

namespace nodalot {

namespace {

std::vector<FlowArc> grid_arcs(const SampleGrid& g) {
  std::vector<FlowArc> arcs;
  for (int v = 0; v < g.node_count(); ++v) {
    for (int e = g.adj_offsets[v]; e < g.adj_offsets[v + 1]; ++e) {
      const int w = g.adj_targets[e];
      if (w <= v) continue;  // undirected edge appears once per direction below
      arcs.push_back({v, w, g.adj_lengths[e]});
      arcs.push_back({w, v, g.adj_lengths[e]});
    }
  }
  return arcs;
}

}  // namespace

SignedMeasures signed_measures(const ScalarField& f) {
  const SampleGrid& g = *f.grid;
  const double band = 1e-12 * field_max_abs(f);
  double mean = 0.0, abs_mass = 0.0;
  for (int v = 0; v < g.node_count(); ++v) {
    mean += g.weights[v] * f.values[v];
    abs_mass += g.weights[v] * std::abs(f.values[v]);
  }
  if (abs_mass <= 0.0) throw OneSignedField("signed_measures: field vanishes identically");
  if (std::abs(mean) > 1e-6 * abs_mass)
    throw std::invalid_argument("signed_measures: field mean " + std::to_string(mean) +
                                " is not numerically zero");

  SignedMeasures sm;
  std::vector<double> pm, nm;
  for (int v = 0; v < g.node_count(); ++v) {
    if (f.values[v] > band) {
      sm.pos.nodes.push_back(v);
      pm.push_back(g.weights[v] * f.values[v]);
    } else if (f.values[v] < -band) {
      sm.neg.nodes.push_back(v);
      nm.push_back(-g.weights[v] * f.values[v]);
    }
  }
  if (sm.pos.nodes.empty() || sm.neg.nodes.empty())
    throw OneSignedField("signed_measures: field does not change sign");
  sm.pos.masses = Eigen::Map<Eigen::ArrayXd>(pm.data(), static_cast<Eigen::Index>(pm.size()));
  sm.neg.masses = Eigen::Map<Eigen::ArrayXd>(nm.data(), static_cast<Eigen::Index>(nm.size()));
  sm.pos.total = sm.pos.masses.sum();
  const double neg_total = sm.neg.masses.sum();
  sm.imbalance = std::abs(sm.pos.total - neg_total) / std::max(sm.pos.total, neg_total);
  sm.neg.masses *= sm.pos.total / neg_total;
  sm.neg.total = sm.pos.total;
  return sm;
}

TransportResult w1_exact(const ScalarField& f) { return w1_exact(f, signed_measures(f)); }

TransportResult w1_exact(const ScalarField& f, const SignedMeasures& sm) {
  const SampleGrid& g = *f.grid;
  Eigen::ArrayXd supply = Eigen::ArrayXd::Zero(g.node_count());
  for (size_t k = 0; k < sm.pos.nodes.size(); ++k)
    supply[sm.pos.nodes[k]] += sm.pos.masses[static_cast<Eigen::Index>(k)];
  for (size_t k = 0; k < sm.neg.nodes.size(); ++k)
    supply[sm.neg.nodes[k]] -= sm.neg.masses[static_cast<Eigen::Index>(k)];
  const FlowResult flow = min_cost_flow(g.node_count(), grid_arcs(g), supply);

  TransportResult res;
  res.method = "exact_flow";
  res.value = flow.cost;
  res.marginal_err = flow.artificial_residual / sm.pos.total;
  res.imbalance = sm.imbalance;
  res.atoms = static_cast<int>(sm.pos.nodes.size() + sm.neg.nodes.size());
  return res;
}

DiscreteMeasure subsample_measure(const DiscreteMeasure& mu, int target, std::uint64_t seed) {
  if (target < 1) throw std::invalid_argument("subsample_measure: target must be >= 1");
  if (static_cast<int>(mu.nodes.size()) <= target) return mu;
  const double stride = mu.total / target;
  std::mt19937_64 eng(seed);
  const double offset = (static_cast<double>(eng() >> 11) * 0x1.0p-53) * stride;

  DiscreteMeasure out;
  std::vector<double> masses;
  double cum = 0.0;
  size_t j = 0;
  for (int k = 0; k < target; ++k) {
    const double s = offset + k * stride;
    while (j + 1 < mu.nodes.size() && cum + mu.masses[static_cast<Eigen::Index>(j)] <= s) {
      cum += mu.masses[static_cast<Eigen::Index>(j)];
      ++j;
    }
    if (!out.nodes.empty() && out.nodes.back() == mu.nodes[j]) {
      masses.back() += stride;
    } else {
      out.nodes.push_back(mu.nodes[j]);
      masses.push_back(stride);
    }
  }
  out.masses = Eigen::Map<Eigen::ArrayXd>(masses.data(), static_cast<Eigen::Index>(masses.size()));
  out.total = mu.total;
  return out;
}

TransportResult w1_sinkhorn(const ScalarField& f, const SignedMeasures& sm,
                            const SinkhornRunOptions& opts) {
  const SampleGrid& g = *f.grid;
  const DiscreteMeasure mu = subsample_measure(sm.pos, opts.target_atoms, opts.seed);
  const DiscreteMeasure nu = subsample_measure(sm.neg, opts.target_atoms, opts.seed + 1);

  const Eigen::Index ns = static_cast<Eigen::Index>(mu.nodes.size());
  const Eigen::Index nt = static_cast<Eigen::Index>(nu.nodes.size());
  Eigen::MatrixXd cost(ns, nt);
  for (Eigen::Index i = 0; i < ns; ++i)
    for (Eigen::Index j = 0; j < nt; ++j)
      cost(i, j) = g.manifold.distance(g.node(mu.nodes[static_cast<size_t>(i)]),
                                       g.node(nu.nodes[static_cast<size_t>(j)]));

  const double spacing =
      std::sqrt(g.manifold.area() / std::max<Eigen::Index>(1, std::max(ns, nt)));
  SinkhornOptions so;
  so.eps_start = opts.eps_start_factor * spacing;
  so.eps_final = opts.eps_final_factor * spacing;
  so.stages = opts.stages;
  so.iters_per_stage = opts.iters_per_stage;
  so.marginal_tol = opts.marginal_tol;
  // Normalize to probability mass for conditioning, then restore the scale.
  const SinkhornResult sr =
      sinkhorn_transport(cost, mu.masses / mu.total, nu.masses / nu.total, so);

  TransportResult res;
  res.method = "sinkhorn";
  res.value = sr.value * mu.total;
  res.marginal_err = sr.marginal_err;
  res.imbalance = sm.imbalance;
  res.seed = opts.seed;
  res.atoms = static_cast<int>(ns + nt);
  return res;
}

WitnessResult lipschitz_witness(const ScalarField& f, const NodalGeometry& ng,
                                const SignedMeasures& sm, double radius) {
  const SampleGrid& g = *f.grid;
  const int n = g.node_count();
  const double band = 1e-12 * field_max_abs(f);
  const double inf = std::numeric_limits<double>::infinity();

  double r_pos = 0.0, r_neg = 0.0;
  for (int v = 0; v < n; ++v) {
    if (f.values[v] > band) r_pos = std::max(r_pos, ng.distance[v]);
    if (f.values[v] < -band) r_neg = std::max(r_neg, ng.distance[v]);
  }
  const double R = radius > 0.0 ? radius : std::min(r_pos, r_neg);
  const double width = 0.5 * R;

  Eigen::ArrayXd seed_y = Eigen::ArrayXd::Constant(n, inf);
  Eigen::ArrayXd seed_z = Eigen::ArrayXd::Constant(n, inf);
  int ny = 0, nz = 0;
  for (int v = 0; v < n; ++v) {
    if (ng.distance[v] < width) continue;
    if (f.values[v] > band) {
      seed_y[v] = 0.0;
      ++ny;
    } else if (f.values[v] < -band) {
      seed_z[v] = 0.0;
      ++nz;
    }
  }
  if (ny == 0 || nz == 0)
    throw EmptySignedRegion("lipschitz_witness: a sign has no samples clear of the tube");

  const Eigen::ArrayXd dy = grid_dijkstra(g, seed_y);
  const Eigen::ArrayXd dz = grid_dijkstra(g, seed_z);

  WitnessResult res;
  res.radius = R;
  res.tube_width = width;
  res.field = Eigen::ArrayXd::Zero(n);
  for (int v = 0; v < n; ++v) {
    const double s = dy[v] + dz[v];
    if (std::isfinite(s) && s > 0.0) res.field[v] = R * (dz[v] - dy[v]) / (4.0 * s);
  }

  double lip = 0.0;
  for (int v = 0; v < n; ++v)
    for (int e = g.adj_offsets[v]; e < g.adj_offsets[v + 1]; ++e)
      lip = std::max(lip, std::abs(res.field[v] - res.field[g.adj_targets[e]]) /
                              g.adj_lengths[e]);
  res.lipschitz = lip;
  if (lip > 0.0) {
    // Rescale to graph slope exactly 1: the maximal admissible witness in
    // this direction, so the certified bound is as tight as it can be.
    res.field /= lip;
    res.deflated = lip > 1.0 + 1e-6;
  }

  for (size_t k = 0; k < sm.pos.nodes.size(); ++k)
    res.lower_bound += res.field[sm.pos.nodes[k]] * sm.pos.masses[static_cast<Eigen::Index>(k)];
  for (size_t k = 0; k < sm.neg.nodes.size(); ++k)
    res.lower_bound -= res.field[sm.neg.nodes[k]] * sm.neg.masses[static_cast<Eigen::Index>(k)];
  return res;
}

UncertaintyResult uncertainty_product(const ScalarField& f, const NodalGeometry& ng,
                                      bool exact, const SinkhornRunOptions& opts) {
  const SignedMeasures sm = signed_measures(f);
  UncertaintyResult out;
  out.lambda = ng.eigenvalue;
  out.w1 = exact ? w1_exact(f, sm).value : w1_sinkhorn(f, sm, opts).value;
  out.l1 = (f.grid->weights * f.values.abs()).sum();
  out.nodal_length = ng.total_length;
  out.product = out.w1 / out.l1 * out.nodal_length;
  return out;
}

std::string transport_result_to_json(const TransportResult& r) {
  nlohmann::json j;
  j["method"] = r.method;
  j["value"] = r.value;
  j["lower_bound"] = r.lower_bound;
  j["marginal_err"] = r.marginal_err;
  j["imbalance"] = r.imbalance;
  j["seed"] = r.seed;
  j["atoms"] = r.atoms;
  return j.dump(2);
}

}  // namespace nodalot
