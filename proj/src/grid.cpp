#include "nodalot/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "nodalot/errors.hpp"

namespace nodalot {

namespace {

constexpr double kPi = 3.14159265358979323846;

void push_edge(std::vector<std::vector<std::pair<int, double>>>& adj, int a, int b, double len) {
  adj[a].emplace_back(b, len);
  adj[b].emplace_back(a, len);
}

void finalize_adjacency(SampleGrid& g, const std::vector<std::vector<std::pair<int, double>>>& adj) {
  const int n = g.node_count();
  g.adj_offsets.assign(n + 1, 0);
  for (int v = 0; v < n; ++v) g.adj_offsets[v + 1] = g.adj_offsets[v] + static_cast<int>(adj[v].size());
  g.adj_targets.resize(g.adj_offsets[n]);
  g.adj_lengths.resize(g.adj_offsets[n]);
  for (int v = 0; v < n; ++v) {
    int at = g.adj_offsets[v];
    for (const auto& [w, len] : adj[v]) {
      g.adj_targets[at] = w;
      g.adj_lengths[at] = len;
      ++at;
    }
  }
}

std::shared_ptr<const SampleGrid> build_torus_grid(const Manifold& m, int n) {
  auto grid = std::make_shared<SampleGrid>();
  SampleGrid& g = *grid;
  g.manifold = m;
  g.ni = n;
  g.nj = n;
  const double hx = m.lx() / n, hy = m.ly() / n;
  g.step_i = hy;
  g.step_j = hx;
  g.spacing = std::max(hx, hy);

  g.nodes.resize(2, static_cast<Eigen::Index>(n) * n);
  g.weights = Eigen::ArrayXd::Constant(static_cast<Eigen::Index>(n) * n, hx * hy);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g.nodes.col(g.index(i, j)) = Point(j * hx, i * hy);

  const double hd = std::hypot(hx, hy);
  std::vector<std::vector<std::pair<int, double>>> adj(g.node_count());
  for (int i = 0; i < n; ++i) {
    const int iu = (i + 1) % n;
    for (int j = 0; j < n; ++j) {
      const int jr = (j + 1) % n;
      const int id = g.index(i, j);
      push_edge(adj, id, g.index(i, jr), hx);
      push_edge(adj, id, g.index(iu, j), hy);
      push_edge(adj, id, g.index(iu, jr), hd);
      push_edge(adj, id, g.index(iu, (j + n - 1) % n), hd);
    }
  }
  finalize_adjacency(g, adj);
  return grid;
}

std::shared_ptr<const SampleGrid> build_sphere_grid(const Manifold& m, int n) {
  auto grid = std::make_shared<SampleGrid>();
  SampleGrid& g = *grid;
  g.manifold = m;
  g.ni = n;       // theta rings
  g.nj = 2 * n;   // phi columns
  const double r = m.radius();
  const double dtheta = kPi / n;
  const double dphi = 2.0 * kPi / g.nj;
  g.step_i = r * dtheta;
  g.step_j = r * dphi;
  g.spacing = std::max(g.step_i, g.step_j);

  const Eigen::Index count = static_cast<Eigen::Index>(g.ni) * g.nj;
  g.nodes.resize(2, count);
  g.weights.resize(count);
  for (int i = 0; i < g.ni; ++i) {
    const double theta = (i + 0.5) * dtheta;
    // Exact cell area: R^2 * dphi * (cos(theta-) - cos(theta+)); the ring sum
    // telescopes so the total is 4*pi*R^2 identically.
    const double w = r * r * dphi * (std::cos(theta - 0.5 * dtheta) - std::cos(theta + 0.5 * dtheta));
    for (int j = 0; j < g.nj; ++j) {
      g.nodes.col(g.index(i, j)) = Point(theta, j * dphi);
      g.weights[g.index(i, j)] = w;
    }
  }

  std::vector<std::vector<std::pair<int, double>>> adj(g.node_count());
  for (int i = 0; i < g.ni; ++i) {
    for (int j = 0; j < g.nj; ++j) {
      const int id = g.index(i, j);
      const int jr = (j + 1) % g.nj;
      push_edge(adj, id, g.index(i, jr), m.distance(g.node(id), g.node(g.index(i, jr))));
      if (i + 1 < g.ni) {
        const int jl = (j + g.nj - 1) % g.nj;
        for (int jn : {j, jr, jl}) {
          const int other = g.index(i + 1, jn);
          push_edge(adj, id, other, m.distance(g.node(id), g.node(other)));
        }
      }
    }
  }
  finalize_adjacency(g, adj);
  return grid;
}

}  // namespace

std::shared_ptr<const SampleGrid> build_grid(const Manifold& m, int resolution) {
  if (resolution < 8)
    throw ResolutionTooCoarse("build_grid: resolution " + std::to_string(resolution) + " < 8");
  return m.is_torus() ? build_torus_grid(m, resolution) : build_sphere_grid(m, resolution);
}

std::vector<int> metric_ball(const SampleGrid& g, const Point& center, double r) {
  if (r < 0.5 * g.spacing)
    throw EmptyBall("metric_ball: radius below half the mesh size");
  const Manifold& m = g.manifold;
  const Point c = m.reduce(center);
  std::vector<int> out;

  if (m.is_torus()) {
    const double hx = g.step_j, hy = g.step_i;
    const int di = static_cast<int>(std::ceil(r / hy)) + 1;
    const int dj = static_cast<int>(std::ceil(r / hx)) + 1;
    const int ic = static_cast<int>(std::floor(c.y() / hy));
    const int jc = static_cast<int>(std::floor(c.x() / hx));
    const int span_i = std::min(2 * di + 1, g.ni), span_j = std::min(2 * dj + 1, g.nj);
    for (int a = 0; a < span_i; ++a) {
      const int i = ((ic - di + a) % g.ni + g.ni) % g.ni;
      for (int b = 0; b < span_j; ++b) {
        const int j = ((jc - dj + b) % g.nj + g.nj) % g.nj;
        const int id = g.index(i, j);
        if (m.distance(g.node(id), c) <= r) out.push_back(id);
      }
    }
    return out;
  }

  const double rad = m.radius();
  const double dtheta = kPi / g.ni, dphi = 2.0 * kPi / g.nj;
  const double ang = r / rad;
  const int i_lo = std::max(0, static_cast<int>(std::floor((c.x() - ang) / dtheta - 0.5)) - 1);
  const int i_hi = std::min(g.ni - 1, static_cast<int>(std::ceil((c.x() + ang) / dtheta - 0.5)) + 1);
  for (int i = i_lo; i <= i_hi; ++i) {
    const double theta = (i + 0.5) * dtheta;
    const double sin_theta = std::sin(theta);
    // Longitude window: the phi-extent of the ball on this ring, padded.
    double half_span = kPi;
    if (sin_theta * rad > 1e-12) {
      const double w = ang / sin_theta + dphi;
      if (w < kPi) half_span = w;
    }
    if (half_span >= kPi - 1e-12) {
      for (int j = 0; j < g.nj; ++j) {
        const int id = g.index(i, j);
        if (m.distance(g.node(id), c) <= r) out.push_back(id);
      }
    } else {
      const int jc = static_cast<int>(std::floor(c.y() / dphi));
      const int dj = static_cast<int>(std::ceil(half_span / dphi)) + 1;
      const int span_j = std::min(2 * dj + 1, g.nj);
      for (int b = 0; b < span_j; ++b) {
        const int j = ((jc - dj + b) % g.nj + g.nj) % g.nj;
        const int id = g.index(i, j);
        if (m.distance(g.node(id), c) <= r) out.push_back(id);
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int nearest_node(const SampleGrid& g, const Point& p) {
  const Point c = g.manifold.reduce(p);
  int i, j;
  if (g.manifold.is_torus()) {
    i = static_cast<int>(std::lround(c.y() / g.step_i)) % g.ni;
    j = static_cast<int>(std::lround(c.x() / g.step_j)) % g.nj;
  } else {
    const double dtheta = kPi / g.ni, dphi = 2.0 * kPi / g.nj;
    i = std::clamp(static_cast<int>(std::lround(c.x() / dtheta - 0.5)), 0, g.ni - 1);
    j = static_cast<int>(std::lround(c.y() / dphi)) % g.nj;
  }
  return g.index((i + g.ni) % g.ni, (j + g.nj) % g.nj);
}

Eigen::ArrayXd grid_dijkstra(const SampleGrid& g, const Eigen::ArrayXd& seed_values) {
  const int n = g.node_count();
  Eigen::ArrayXd dist = Eigen::ArrayXd::Constant(n, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  for (int v = 0; v < n; ++v) {
    if (std::isfinite(seed_values[v])) {
      dist[v] = seed_values[v];
      heap.emplace(dist[v], v);
    }
  }
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    for (int e = g.adj_offsets[v]; e < g.adj_offsets[v + 1]; ++e) {
      const int w = g.adj_targets[e];
      const double nd = d + g.adj_lengths[e];
      if (nd < dist[w]) {
        dist[w] = nd;
        heap.emplace(nd, w);
      }
    }
  }
  return dist;
}

}  // namespace nodalot
