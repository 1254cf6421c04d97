#include "nodalot/massconc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nodalot/errors.hpp"

namespace nodalot {

namespace {

double lp_accumulate(const ScalarField& f, const std::vector<char>& mask, double p,
                     bool positive_part, bool negative_part) {
  const auto& v = f.values;
  const auto& w = f.grid->weights;
  const int n = f.grid->node_count();
  bool any = false;
  if (std::isinf(p)) {
    double sup = 0.0;
    for (int i = 0; i < n; ++i) {
      if (!mask[static_cast<size_t>(i)]) continue;
      any = true;
      double x = v[i];
      if (positive_part && x < 0.0) x = 0.0;
      if (negative_part && x > 0.0) x = 0.0;
      sup = std::max(sup, std::abs(x));
    }
    if (!any) throw EmptyRegionSup("sup norm over an empty node set");
    return sup;
  }
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!mask[static_cast<size_t>(i)]) continue;
    double x = v[i];
    if (positive_part && x < 0.0) x = 0.0;
    if (negative_part && x > 0.0) x = 0.0;
    acc += w[i] * std::pow(std::abs(x), p);
  }
  return std::pow(acc, 1.0 / p);
}

}  // namespace

double lp_norm(const ScalarField& f, const std::vector<char>& mask, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
  if (static_cast<int>(mask.size()) != f.grid->node_count())
    throw std::invalid_argument("lp_norm: mask size mismatch");
  if (!std::isinf(p)) {
    bool any = std::any_of(mask.begin(), mask.end(), [](char c) { return c != 0; });
    if (!any) return 0.0;
  }
  return lp_accumulate(f, mask, p, false, false);
}

double lp_norm(const ScalarField& f, const std::vector<int>& region, double p) {
  std::vector<char> mask(static_cast<size_t>(f.grid->node_count()), 0);
  for (int id : region) {
    if (id < 0 || id >= f.grid->node_count())
      throw std::invalid_argument("lp_norm: node id out of range");
    mask[static_cast<size_t>(id)] = 1;
  }
  return lp_norm(f, mask, p);
}

double lp_norm(const ScalarField& f, double p) {
  std::vector<char> mask(static_cast<size_t>(f.grid->node_count()), 1);
  return lp_norm(f, mask, p);
}

RetentionReport retention(const ScalarField& f, const NodalGeometry& ng,
                          const std::vector<double>& deltas, const std::vector<double>& ps) {
  RetentionReport rep;
  rep.lambda = ng.eigenvalue;
  const double sqrt_lambda = std::sqrt(ng.eigenvalue);
  const int n = f.grid->node_count();
  for (double delta : deltas) {
    if (!(delta >= 0.0)) throw std::invalid_argument("retention: delta must be >= 0");
    std::vector<char> outside(static_cast<size_t>(n), 0);
    for (int i = 0; i < n; ++i)
      outside[static_cast<size_t>(i)] = ng.distance[i] > delta ? 1 : 0;
    for (double p : ps) {
      RetentionRow row;
      row.p = p;
      row.delta = delta;
      row.delta_sqrtlambda = delta * sqrt_lambda;
      const double denom = lp_norm(f, p);
      if (denom <= 0.0) throw std::invalid_argument("retention: field vanishes identically");
      row.ratio_total = lp_accumulate(f, outside, p, false, false) / denom;
      row.ratio_pos = lp_accumulate(f, outside, p, true, false) / denom;
      row.ratio_neg = lp_accumulate(f, outside, p, false, true) / denom;
      rep.rows.push_back(row);
    }
  }
  return rep;
}

TubeMassProfile tube_mass_profile(const ScalarField& f, const NodalGeometry& ng, double p,
                                  int count) {
  if (count < 2) throw std::invalid_argument("tube_mass_profile: count must be >= 2");
  if (!(p >= 1.0) || std::isinf(p))
    throw std::invalid_argument("tube_mass_profile: p must be finite and >= 1");
  TubeMassProfile prof;
  prof.p = p;
  const double sqrt_lambda = std::sqrt(ng.eigenvalue);
  const double hi = std::max(density_radius(ng).normalized, 2e-2);
  const double lo = 1e-2;
  const auto& v = f.values;
  const auto& w = f.grid->weights;
  const int n = f.grid->node_count();
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += w[i] * std::pow(std::abs(v[i]), p);
  if (total <= 0.0) throw std::invalid_argument("tube_mass_profile: field vanishes identically");
  for (int k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) / (count - 1);
    const double dsl = lo * std::pow(hi / lo, t);
    const double delta = dsl / sqrt_lambda;
    double inside = 0.0;
    for (int i = 0; i < n; ++i)
      if (ng.distance[i] <= delta) inside += w[i] * std::pow(std::abs(v[i]), p);
    prof.delta_sqrtlambda.push_back(dsl);
    prof.tube_fraction.push_back(inside / total);
  }
  return prof;
}

}  // namespace nodalot
