#include "nodalot/mincostflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nodalot/errors.hpp"

namespace nodalot {

namespace {

// Spanning-tree basis over the input nodes plus an artificial root.  Tree arcs
// are recorded on their child node; children lists let pivots re-root the
// subtree that changes side.
struct Basis {
  std::vector<int> parent, pred_arc, depth;
  std::vector<char> pred_up;  // pred arc oriented child -> parent
  std::vector<double> pi;
  std::vector<std::vector<int>> children;

  void detach(int v) {
    auto& sib = children[static_cast<size_t>(parent[static_cast<size_t>(v)])];
    sib.erase(std::find(sib.begin(), sib.end(), v));
  }
};

}  // namespace

FlowResult min_cost_flow(int n_nodes, const std::vector<FlowArc>& arcs,
                         const Eigen::ArrayXd& supply, long max_pivots) {
  if (supply.size() != n_nodes) throw std::invalid_argument("min_cost_flow: supply size mismatch");
  const int m = static_cast<int>(arcs.size());
  double total_pos = 0.0, net = 0.0, max_cost = 0.0;
  for (int v = 0; v < n_nodes; ++v) {
    net += supply[v];
    if (supply[v] > 0.0) total_pos += supply[v];
  }
  for (const FlowArc& a : arcs) {
    if (a.tail < 0 || a.tail >= n_nodes || a.head < 0 || a.head >= n_nodes)
      throw std::invalid_argument("min_cost_flow: arc endpoint out of range");
    if (a.cost < 0.0) throw std::invalid_argument("min_cost_flow: negative arc cost");
    max_cost = std::max(max_cost, a.cost);
  }
  if (std::abs(net) > 1e-9 * std::max(total_pos, 1e-300))
    throw std::invalid_argument("min_cost_flow: supplies do not balance");

  const int root = n_nodes;
  // Must dominate every simple-path cost while staying far from the reduced
  // cost tolerance in double precision.
  const double big = max_cost * (n_nodes + 1) + 1.0;
  const double tol = 1e-11 * std::max(1.0, max_cost);
  if (max_pivots < 0) max_pivots = 64L * n_nodes + 2L * m + 1024L;

  // Arc ids: [0, m) input arcs, [m, m + n) artificial arcs paired with nodes.
  std::vector<double> flow(static_cast<size_t>(m + n_nodes), 0.0);
  std::vector<char> in_tree(static_cast<size_t>(m + n_nodes), 0);

  Basis t;
  t.parent.assign(static_cast<size_t>(n_nodes + 1), root);
  t.pred_arc.assign(static_cast<size_t>(n_nodes + 1), -1);
  t.depth.assign(static_cast<size_t>(n_nodes + 1), 1);
  t.pred_up.assign(static_cast<size_t>(n_nodes + 1), 1);
  t.pi.assign(static_cast<size_t>(n_nodes + 1), 0.0);
  t.children.assign(static_cast<size_t>(n_nodes + 1), {});
  t.parent[static_cast<size_t>(root)] = -1;
  t.depth[static_cast<size_t>(root)] = 0;
  for (int v = 0; v < n_nodes; ++v) {
    t.pred_arc[static_cast<size_t>(v)] = m + v;
    t.pred_up[static_cast<size_t>(v)] = supply[v] >= 0.0 ? 1 : 0;
    t.pi[static_cast<size_t>(v)] = supply[v] >= 0.0 ? big : -big;
    t.children[static_cast<size_t>(root)].push_back(v);
    flow[static_cast<size_t>(m + v)] = std::abs(supply[v]);
    in_tree[static_cast<size_t>(m + v)] = 1;
  }

  const auto reduced = [&](int a) {
    return arcs[static_cast<size_t>(a)].cost - t.pi[static_cast<size_t>(arcs[static_cast<size_t>(a)].tail)] +
           t.pi[static_cast<size_t>(arcs[static_cast<size_t>(a)].head)];
  };

  FlowResult result;
  const int block = std::max(64, static_cast<int>(std::sqrt(static_cast<double>(std::max(m, 1)))));
  int scan_pos = 0;
  std::vector<int> cycle_nodes;
  std::vector<signed char> cycle_dirs;
  std::vector<int> stack;

  while (true) {
    // Block pricing: most negative reduced cost in the first violating block.
    int entering = -1;
    double best = -tol;
    int seen = 0;
    while (seen < m) {
      const int stop = std::min(m - seen, block);
      for (int k = 0; k < stop; ++k) {
        const int a = scan_pos;
        scan_pos = scan_pos + 1 == m ? 0 : scan_pos + 1;
        if (in_tree[static_cast<size_t>(a)]) continue;
        const double rc = reduced(a);
        if (rc < best) {
          best = rc;
          entering = a;
        }
      }
      seen += stop;
      if (entering >= 0) break;
    }
    if (entering < 0) break;  // optimal
    if (++result.pivots > max_pivots)
      throw NotConverged("min_cost_flow: pivot budget exhausted at " +
                         std::to_string(result.pivots));

    const int u = arcs[static_cast<size_t>(entering)].tail;
    const int v = arcs[static_cast<size_t>(entering)].head;
    const double rc_enter = best;

    // Collect the cycle: theta flows u -> v on the entering arc, then back
    // from v over the tree to u.  dir = +1 where tree flow increases.
    cycle_nodes.clear();
    cycle_dirs.clear();
    int x = u, y = v;
    auto ascend_u = [&](int w) {  // on the apex->u leg, travel parent -> w
      cycle_nodes.push_back(w);
      cycle_dirs.push_back(t.pred_up[static_cast<size_t>(w)] ? -1 : +1);
    };
    auto ascend_v = [&](int w) {  // on the v->apex leg, travel w -> parent
      cycle_nodes.push_back(w);
      cycle_dirs.push_back(t.pred_up[static_cast<size_t>(w)] ? +1 : -1);
    };
    while (t.depth[static_cast<size_t>(x)] > t.depth[static_cast<size_t>(y)]) {
      ascend_u(x);
      x = t.parent[static_cast<size_t>(x)];
    }
    while (t.depth[static_cast<size_t>(y)] > t.depth[static_cast<size_t>(x)]) {
      ascend_v(y);
      y = t.parent[static_cast<size_t>(y)];
    }
    while (x != y) {
      ascend_u(x);
      x = t.parent[static_cast<size_t>(x)];
      ascend_v(y);
      y = t.parent[static_cast<size_t>(y)];
    }

    // Ratio test: deepest blocking arc among the minima (anti-cycling bias).
    double theta = std::numeric_limits<double>::infinity();
    int leave_node = -1;
    for (size_t k = 0; k < cycle_nodes.size(); ++k) {
      if (cycle_dirs[k] > 0) continue;
      const double cap = flow[static_cast<size_t>(t.pred_arc[static_cast<size_t>(cycle_nodes[k])])];
      if (cap < theta - 1e-15 ||
          (cap <= theta + 1e-15 &&
           (leave_node < 0 || t.depth[static_cast<size_t>(cycle_nodes[k])] >
                                  t.depth[static_cast<size_t>(leave_node)]))) {
        theta = std::min(theta, cap);
        leave_node = cycle_nodes[k];
      }
    }
    if (leave_node < 0)
      throw InfeasibleFlow("min_cost_flow: unbounded negative cycle");

    flow[static_cast<size_t>(entering)] += theta;
    for (size_t k = 0; k < cycle_nodes.size(); ++k) {
      const int arc = t.pred_arc[static_cast<size_t>(cycle_nodes[k])];
      flow[static_cast<size_t>(arc)] += cycle_dirs[k] > 0 ? theta : -theta;
      if (cycle_dirs[k] < 0 && flow[static_cast<size_t>(arc)] < 0.0)
        flow[static_cast<size_t>(arc)] = 0.0;  // crush ratio-test rounding dust
    }

    const int leaving_arc = t.pred_arc[static_cast<size_t>(leave_node)];
    in_tree[static_cast<size_t>(leaving_arc)] = 0;
    in_tree[static_cast<size_t>(entering)] = 1;
    flow[static_cast<size_t>(leaving_arc)] = 0.0;

    // The subtree under leave_node changes sides; it contains exactly one
    // endpoint of the entering arc.  Re-root it there and hang it on the
    // other endpoint, reversing the pred chain on the way up.
    bool u_inside = false;
    for (int w = u; w != -1; w = t.parent[static_cast<size_t>(w)]) {
      if (w == leave_node) {
        u_inside = true;
        break;
      }
    }
    const int e_in = u_inside ? u : v;
    const int e_out = u_inside ? v : u;
    // Potential shift making the entering arc tight across the moved subtree.
    const double delta = u_inside ? rc_enter : -rc_enter;

    int w = e_in;
    int prev_parent = t.parent[static_cast<size_t>(w)];
    int prev_arc = t.pred_arc[static_cast<size_t>(w)];
    char prev_up = t.pred_up[static_cast<size_t>(w)];
    t.detach(w);
    t.parent[static_cast<size_t>(w)] = e_out;
    t.pred_arc[static_cast<size_t>(w)] = entering;
    t.pred_up[static_cast<size_t>(w)] = u_inside ? 1 : 0;
    t.children[static_cast<size_t>(e_out)].push_back(w);
    while (w != leave_node) {
      const int nxt = prev_parent;
      const int nxt_parent = t.parent[static_cast<size_t>(nxt)];
      const int nxt_arc = t.pred_arc[static_cast<size_t>(nxt)];
      const char nxt_up = t.pred_up[static_cast<size_t>(nxt)];
      // nxt re-hangs under w with the old connecting arc reversed.
      t.detach(nxt);
      t.parent[static_cast<size_t>(nxt)] = w;
      t.pred_arc[static_cast<size_t>(nxt)] = prev_arc;
      t.pred_up[static_cast<size_t>(nxt)] = prev_up ? 0 : 1;
      t.children[static_cast<size_t>(w)].push_back(nxt);
      w = nxt;
      prev_parent = nxt_parent;
      prev_arc = nxt_arc;
      prev_up = nxt_up;
    }

    // Refresh depth and potential across the moved subtree.
    stack.assign(1, e_in);
    while (!stack.empty()) {
      const int s = stack.back();
      stack.pop_back();
      t.depth[static_cast<size_t>(s)] = t.depth[static_cast<size_t>(t.parent[static_cast<size_t>(s)])] + 1;
      t.pi[static_cast<size_t>(s)] += delta;
      for (int c : t.children[static_cast<size_t>(s)]) stack.push_back(c);
    }
  }

  for (int v = 0; v < n_nodes; ++v)
    result.artificial_residual += flow[static_cast<size_t>(m + v)];
  if (result.artificial_residual > 1e-9 * std::max(total_pos, 1e-300))
    throw InfeasibleFlow("min_cost_flow: artificial residual " +
                         std::to_string(result.artificial_residual));
  result.flow.assign(flow.begin(), flow.begin() + m);
  for (int a = 0; a < m; ++a) result.cost += arcs[static_cast<size_t>(a)].cost * result.flow[static_cast<size_t>(a)];
  return result;
}

}  // namespace nodalot
