#include "nodalot/densetransport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "nodalot/errors.hpp"

namespace nodalot {

double dense_transport_cost(const Eigen::MatrixXd& cost, const Eigen::ArrayXd& supply,
                            const Eigen::ArrayXd& demand) {
  const int ns = static_cast<int>(supply.size());
  const int nt = static_cast<int>(demand.size());
  if (cost.rows() != ns || cost.cols() != nt)
    throw std::invalid_argument("dense_transport: cost matrix shape mismatch");
  if ((supply < 0.0).any() || (demand < 0.0).any() || (cost.array() < 0.0).any())
    throw std::invalid_argument("dense_transport: negative input");
  const double total = supply.sum();
  if (std::abs(total - demand.sum()) > 1e-9 * std::max(total, 1e-300))
    throw std::invalid_argument("dense_transport: unbalanced marginals");

  const int nv = ns + nt;  // sources then sinks
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd flow = Eigen::MatrixXd::Zero(ns, nt);
  Eigen::ArrayXd rem_s = supply, rem_t = demand;
  std::vector<double> pi(static_cast<size_t>(nv), 0.0), dist(static_cast<size_t>(nv));
  std::vector<int> prev(static_cast<size_t>(nv));
  std::vector<char> done(static_cast<size_t>(nv));

  double shipped = 0.0;
  long rounds = 0;
  const long max_rounds = 50L * nv + 1000L;
  while (total - shipped > 1e-12 * std::max(total, 1e-300)) {
    if (++rounds > max_rounds) throw NotConverged("dense_transport: augmentation budget spent");
    // Multi-source Dijkstra over reduced costs from unsaturated supplies.
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(prev.begin(), prev.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    for (int i = 0; i < ns; ++i)
      if (rem_s[i] > 0.0) dist[static_cast<size_t>(i)] = 0.0;
    for (int step = 0; step < nv; ++step) {
      int x = -1;
      double dx = inf;
      for (int y = 0; y < nv; ++y)
        if (!done[static_cast<size_t>(y)] && dist[static_cast<size_t>(y)] < dx) {
          dx = dist[static_cast<size_t>(y)];
          x = y;
        }
      if (x < 0) break;
      done[static_cast<size_t>(x)] = 1;
      // Reduced costs are >= 0 up to rounding; clamp and never relax settled
      // nodes, or fp noise could rewrite prev[] of a done node into a cycle.
      if (x < ns) {
        for (int j = 0; j < nt; ++j) {
          if (done[static_cast<size_t>(ns + j)]) continue;
          const double w = std::max(
              0.0, cost(x, j) + pi[static_cast<size_t>(x)] - pi[static_cast<size_t>(ns + j)]);
          if (dx + w < dist[static_cast<size_t>(ns + j)]) {
            dist[static_cast<size_t>(ns + j)] = dx + w;
            prev[static_cast<size_t>(ns + j)] = x;
          }
        }
      } else {
        const int j = x - ns;
        for (int i = 0; i < ns; ++i) {
          if (done[static_cast<size_t>(i)] || flow(i, j) <= 0.0) continue;
          const double w = std::max(
              0.0, -cost(i, j) + pi[static_cast<size_t>(x)] - pi[static_cast<size_t>(i)]);
          if (dx + w < dist[static_cast<size_t>(i)]) {
            dist[static_cast<size_t>(i)] = dx + w;
            prev[static_cast<size_t>(i)] = x;
          }
        }
      }
    }

    int target = -1;
    double dt = inf;
    for (int j = 0; j < nt; ++j)
      if (rem_t[j] > 0.0 && dist[static_cast<size_t>(ns + j)] < dt) {
        dt = dist[static_cast<size_t>(ns + j)];
        target = ns + j;
      }
    if (target < 0) throw InfeasibleFlow("dense_transport: no augmenting path");

    // Bottleneck along the stored path, then push and update potentials.
    double theta = rem_t[target - ns];
    for (int x = target; prev[static_cast<size_t>(x)] != -1; x = prev[static_cast<size_t>(x)]) {
      const int p = prev[static_cast<size_t>(x)];
      if (p >= ns) theta = std::min(theta, flow(x, p - ns));  // backward arc
    }
    {
      int x = target;
      while (prev[static_cast<size_t>(x)] != -1) x = prev[static_cast<size_t>(x)];
      theta = std::min(theta, rem_s[x]);
    }
    for (int x = target; prev[static_cast<size_t>(x)] != -1; x = prev[static_cast<size_t>(x)]) {
      const int p = prev[static_cast<size_t>(x)];
      if (p < ns)
        flow(p, x - ns) += theta;
      else
        flow(x, p - ns) -= theta;
    }
    {
      int x = target;
      while (prev[static_cast<size_t>(x)] != -1) x = prev[static_cast<size_t>(x)];
      rem_s[x] -= theta;
    }
    rem_t[target - ns] -= theta;
    shipped += theta;
    for (int y = 0; y < nv; ++y)
      pi[static_cast<size_t>(y)] += std::min(dist[static_cast<size_t>(y)], dt);
  }
  return (flow.array() * cost.array()).sum();
}

}  // namespace nodalot
