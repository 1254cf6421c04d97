#include "nodalot/nodal.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include <json.hpp>

#include "nodalot/errors.hpp"

namespace nodalot {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

double wrap_diff(double d, double period) {
  d = std::fmod(d, period);
  if (d > 0.5 * period) d -= period;
  if (d < -0.5 * period) d += period;
  return d;
}

// Euclidean distance from the origin to segment [a, b] in the plane.
double point_segment_flat(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 < 1e-300) return a.norm();
  const double t = std::clamp(-a.dot(ab) / len2, 0.0, 1.0);
  return (a + t * ab).norm();
}

// Geodesic distance from chart point p to a short great-circle arc.
double point_arc_sphere(const Manifold& m, const Point& p, const Point& a, const Point& b) {
  const double r = m.radius();
  const Eigen::Vector3d x = m.embed(p) / r;
  const Eigen::Vector3d u = m.embed(a) / r;
  const Eigen::Vector3d v = m.embed(b) / r;
  const double da = std::atan2(x.cross(u).norm(), x.dot(u));
  const double db = std::atan2(x.cross(v).norm(), x.dot(v));
  double best = std::min(da, db);
  Eigen::Vector3d n = u.cross(v);
  const double nn = n.norm();
  if (nn > 1e-14) {
    n /= nn;
    Eigen::Vector3d proj = x - x.dot(n) * n;
    const double pn = proj.norm();
    if (pn > 1e-14) {
      proj /= pn;
      // Foot of x on the great circle lies inside the (short) arc?
      if (u.cross(proj).dot(n) >= -1e-12 && proj.cross(v).dot(n) >= -1e-12) {
        const double s = std::clamp(std::abs(x.dot(n)), 0.0, 1.0);
        best = std::min(best, std::asin(s));
      }
    }
  }
  return r * best;
}

struct CellGeometry {
  Point base;        // chart coordinates of the (i, j) corner node
  double du, dv;     // chart extents along columns/rows
};

// Marching squares over one cell.  Corner order: A=(0,0), B=(du,0), C=(du,dv),
// D=(0,dv) in local (column, row) offsets; fA..fD the field values.  The sign
// test is exact so crossings survive even where the field is exponentially
// small (beam polar caps); exact zeros count as negative, which lands the
// crossing endpoint on the zero node.  Appends 0, 1 or 2 segments.
void march_cell(const CellGeometry& cell, double fA, double fB, double fC, double fD,
                std::vector<std::pair<Point, Point>>& out) {
  const auto sgn = [](double v) { return v > 0.0 ? 1 : -1; };
  const int sA = sgn(fA), sB = sgn(fB), sC = sgn(fC), sD = sgn(fD);
  const int code = (sA > 0) | ((sB > 0) << 1) | ((sC > 0) << 2) | ((sD > 0) << 3);
  if (code == 0 || code == 15) return;

  const auto cross = [](double va, double vb) { return va / (va - vb); };
  // Crossing points on the four edges (valid only where the edge changes sign).
  const Point eAB(cell.base.x() + cross(fA, fB) * cell.du, cell.base.y());
  const Point eBC(cell.base.x() + cell.du, cell.base.y() + cross(fB, fC) * cell.dv);
  const Point eCD(cell.base.x() + (1.0 - cross(fC, fD)) * cell.du, cell.base.y() + cell.dv);
  const Point eDA(cell.base.x(), cell.base.y() + (1.0 - cross(fD, fA)) * cell.dv);

  switch (code) {
    case 1: case 14: out.emplace_back(eDA, eAB); break;   // A isolated
    case 2: case 13: out.emplace_back(eAB, eBC); break;   // B isolated
    case 4: case 11: out.emplace_back(eBC, eCD); break;   // C isolated
    case 8: case 7:  out.emplace_back(eCD, eDA); break;   // D isolated
    case 3: case 12: out.emplace_back(eDA, eBC); break;   // bottom/top split
    case 6: case 9:  out.emplace_back(eAB, eCD); break;   // left/right split
    case 5: case 10: {
      // Saddle: both diagonals agree; the cell-center average picks which
      // pair of corners is joined through the middle.
      const double center = 0.25 * (fA + fB + fC + fD);
      const bool center_with_A = (sgn(center) == sA);
      if (center_with_A) {
        out.emplace_back(eAB, eBC);  // arc hugging B
        out.emplace_back(eCD, eDA);  // arc hugging D
      } else {
        out.emplace_back(eDA, eAB);  // arc hugging A
        out.emplace_back(eBC, eCD);  // arc hugging C
      }
      break;
    }
    default: break;
  }
}

double segment_length(const Manifold& m, const Point& a, const Point& b) {
  if (m.is_torus()) return (a - b).norm();
  const double chord = (m.embed(a) - m.embed(b)).norm();
  return 2.0 * m.radius() * std::asin(std::min(1.0, chord / (2.0 * m.radius())));
}

// Exact near-field distance: every segment relaxes the nodes in an index
// window of geodesic radius `cutoff` around it.
void relax_exact_distances(const SampleGrid& g, const std::vector<NodalSegment>& segments,
                           double cutoff, Eigen::ArrayXd& dist) {
  const Manifold& m = g.manifold;
  if (m.is_torus()) {
    const double hx = g.step_j, hy = g.step_i;
    const int dj = std::min(g.nj / 2, static_cast<int>(std::ceil(cutoff / hx)) + 1);
    const int di = std::min(g.ni / 2, static_cast<int>(std::ceil(cutoff / hy)) + 1);
    for (const auto& seg : segments) {
      const Point mid = 0.5 * (seg.a + seg.b);
      const int ic = static_cast<int>(std::lround(mid.y() / hy));
      const int jc = static_cast<int>(std::lround(mid.x() / hx));
      for (int a = -di; a <= di; ++a) {
        const int i = ((ic + a) % g.ni + g.ni) % g.ni;
        for (int b = -dj; b <= dj; ++b) {
          const int j = ((jc + b) % g.nj + g.nj) % g.nj;
          const int id = g.index(i, j);
          const Point node = g.node(id);
          // Shift the whole segment coherently into the node's frame.
          const Eigen::Vector2d shift(wrap_diff(mid.x() - node.x(), m.lx()) - (mid.x() - node.x()),
                                      wrap_diff(mid.y() - node.y(), m.ly()) - (mid.y() - node.y()));
          const double d = point_segment_flat(seg.a + shift - node, seg.b + shift - node);
          if (d < dist[id]) dist[id] = d;
        }
      }
    }
    return;
  }

  const double rad = m.radius();
  const double dtheta = kPi / g.ni, dphi = 2.0 * kPi / g.nj;
  const double ang = cutoff / rad;
  for (const auto& seg : segments) {
    const Point mid = m.reduce(0.5 * (seg.a + seg.b));
    const int i_lo = std::max(0, static_cast<int>(std::floor((mid.x() - ang) / dtheta - 0.5)) - 1);
    const int i_hi = std::min(g.ni - 1, static_cast<int>(std::ceil((mid.x() + ang) / dtheta - 0.5)) + 1);
    for (int i = i_lo; i <= i_hi; ++i) {
      const double theta = (i + 0.5) * dtheta;
      const double st = std::sin(theta);
      double half_span = kPi;
      if (st > 1e-12) {
        const double w = ang / st + 2.0 * dphi;
        if (w < kPi) half_span = w;
      }
      int j_begin = 0, j_count = g.nj;
      if (half_span < kPi - 1e-12) {
        const int jc = static_cast<int>(std::lround(mid.y() / dphi));
        const int djw = static_cast<int>(std::ceil(half_span / dphi)) + 1;
        j_begin = jc - djw;
        j_count = std::min(2 * djw + 1, g.nj);
      }
      for (int b = 0; b < j_count; ++b) {
        const int j = ((j_begin + b) % g.nj + g.nj) % g.nj;
        const int id = g.index(i, j);
        const double d = point_arc_sphere(m, g.node(id), seg.a, seg.b);
        if (d < dist[id]) dist[id] = d;
      }
    }
  }
}

}  // namespace

int nodal_domains(const ScalarField& f, double zero_band, Eigen::ArrayXi& labels,
                  std::vector<int>& domain_signs) {
  const SampleGrid& g = *f.grid;
  const int n = g.node_count();
  labels = Eigen::ArrayXi::Zero(n);
  domain_signs.assign(1, 0);  // index 0 unused (zero band)
  const bool torus = g.manifold.is_torus();
  int next = 0;
  std::deque<int> queue;
  for (int s = 0; s < n; ++s) {
    if (labels[s] != 0 || std::abs(f.values[s]) <= zero_band) continue;
    const int sign = f.values[s] > 0 ? 1 : -1;
    ++next;
    domain_signs.push_back(sign);
    labels[s] = next;
    queue.push_back(s);
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      const int i = g.row_of(v), j = g.col_of(v);
      int neigh[4];
      int cnt = 0;
      neigh[cnt++] = g.index(i, (j + 1) % g.nj);
      neigh[cnt++] = g.index(i, (j + g.nj - 1) % g.nj);
      if (torus) {
        neigh[cnt++] = g.index((i + 1) % g.ni, j);
        neigh[cnt++] = g.index((i + g.ni - 1) % g.ni, j);
      } else {
        if (i + 1 < g.ni) neigh[cnt++] = g.index(i + 1, j);
        if (i > 0) neigh[cnt++] = g.index(i - 1, j);
      }
      for (int q = 0; q < cnt; ++q) {
        const int w = neigh[q];
        if (labels[w] != 0 || std::abs(f.values[w]) <= zero_band) continue;
        if ((f.values[w] > 0 ? 1 : -1) != sign) continue;
        labels[w] = next;
        queue.push_back(w);
      }
    }
  }
  return next;
}

NodalGeometry extract_nodal_set(const ScalarField& f, double eigenvalue) {
  NodalGeometry ng;
  ng.grid = f.grid;
  ng.eigenvalue = eigenvalue;
  const SampleGrid& g = *f.grid;
  const Manifold& m = g.manifold;
  ng.zero_band = 1e-12 * field_max_abs(f);

  // March all cells; sphere cells live between adjacent rings only.  The
  // cell's x axis must follow the chart's first coordinate: the column step
  // on the torus, the polar step theta on the sphere.
  std::vector<std::pair<Point, Point>> raw;
  const bool torus = m.is_torus();
  const int rows = torus ? g.ni : g.ni - 1;
  for (int i = 0; i < rows; ++i) {
    const int iu = torus ? (i + 1) % g.ni : i + 1;
    for (int j = 0; j < g.nj; ++j) {
      const int jr = (j + 1) % g.nj;
      CellGeometry cell;
      cell.base = g.node(g.index(i, j));
      cell.du = torus ? g.step_j : kPi / g.ni;
      cell.dv = torus ? g.step_i : 2.0 * kPi / g.nj;
      const int b = torus ? g.index(i, jr) : g.index(iu, j);
      const int d = torus ? g.index(iu, j) : g.index(i, jr);
      march_cell(cell, f.values[g.index(i, j)], f.values[b], f.values[g.index(iu, jr)],
                 f.values[d], raw);
    }
  }

  ng.segments.reserve(raw.size());
  ng.total_length = 0.0;
  for (const auto& [a, b] : raw) {
    NodalSegment seg{a, b, segment_length(m, a, b)};
    ng.total_length += seg.length;
    ng.segments.push_back(seg);
  }

  const int n = g.node_count();
  bool any_band = false;
  for (int v = 0; v < n; ++v)
    if (std::abs(f.values[v]) <= ng.zero_band) { any_band = true; break; }
  if (ng.segments.empty() && !any_band)
    throw NoZeroCrossing("extract_nodal_set: field has a single strict sign");

  // Distance field: exact point-to-segment out to ~3 wavelengths (and never
  // less than a few cells), Dijkstra relaxation beyond.
  const double wavelength = eigenvalue > 0 ? 1.0 / std::sqrt(eigenvalue) : m.diameter();
  ng.exact_radius = std::min(std::max(3.0 * wavelength, 8.0 * g.spacing), m.diameter());
  ng.distance = Eigen::ArrayXd::Constant(n, kInf);
  relax_exact_distances(g, ng.segments, ng.exact_radius, ng.distance);
  for (int v = 0; v < n; ++v)
    if (std::abs(f.values[v]) <= ng.zero_band) ng.distance[v] = 0.0;
  Eigen::ArrayXd seeds = ng.distance;
  for (int v = 0; v < n; ++v)
    if (seeds[v] > ng.exact_radius) seeds[v] = kInf;
  const Eigen::ArrayXd relaxed = grid_dijkstra(g, seeds);
  ng.distance = ng.distance.min(relaxed);

  ng.domain_count = nodal_domains(f, ng.zero_band, ng.labels, ng.domain_signs);
  return ng;
}

std::vector<char> tube_mask(const NodalGeometry& ng, double delta) {
  const int n = ng.grid->node_count();
  std::vector<char> mask(n, 0);
  for (int v = 0; v < n; ++v) mask[v] = ng.distance[v] <= delta ? 1 : 0;
  return mask;
}

DensityRadius density_radius(const NodalGeometry& ng) {
  DensityRadius d;
  d.sup = ng.distance.maxCoeff();
  d.normalized = d.sup * std::sqrt(ng.eigenvalue);
  return d;
}

AsymmetryResult asymmetry_ratio(const ScalarField& f, const NodalGeometry& ng,
                                const Point& center, double r) {
  const SampleGrid& g = *f.grid;
  AsymmetryResult res;
  const std::vector<int> ball = metric_ball(g, center, r);
  double vol = 0.0, pos = 0.0;
  for (int v : ball) {
    vol += g.weights[v];
    if (f.values[v] > ng.zero_band) pos += g.weights[v];
  }
  res.ratio = vol > 0 ? pos / vol : 0.0;

  // The half-ball meets the zero set iff some node within r/2 (+ one cell of
  // slack) sits within a cell of a segment.
  res.meets_nodal_set = false;
  const double half_r = std::max(0.5 * r + g.spacing, 0.5 * g.spacing + 1e-12);
  for (int v : metric_ball(g, center, half_r)) {
    if (ng.distance[v] <= g.spacing) { res.meets_nodal_set = true; break; }
  }
  return res;
}

InscribedBall inscribed_sign_ball(const ScalarField& f, const NodalGeometry& ng,
                                  const Point& center, double r, int sign) {
  const SampleGrid& g = *f.grid;
  InscribedBall best;
  best.value = -kInf;
  for (int v : metric_ball(g, center, r)) {
    const double val = f.values[v];
    if (sign > 0 ? (val <= ng.zero_band) : (val >= -ng.zero_band)) continue;
    const double score = std::min(ng.distance[v], r - g.manifold.distance(g.node(v), center));
    const bool better =
        score > best.value + 1e-15 ||
        (std::abs(score - best.value) <= 1e-15 && best.node >= 0 &&
         (g.node(v).x() < g.node(best.node).x() ||
          (g.node(v).x() == g.node(best.node).x() && g.node(v).y() < g.node(best.node).y())));
    if (better) {
      best.node = v;
      best.value = score;
    }
  }
  if (best.node < 0) throw NoSignPresent("inscribed_sign_ball: requested sign absent from ball");
  return best;
}

std::string nodal_geometry_to_json(const NodalGeometry& ng) {
  nlohmann::json j;
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : ng.segments)
    segs.push_back({{s.a.x(), s.a.y()}, {s.b.x(), s.b.y()}});
  j["segments"] = std::move(segs);
  j["domain_count"] = ng.domain_count;
  j["length"] = ng.total_length;
  j["density_radius"] = density_radius(ng).sup;
  return j.dump();
}

}  // namespace nodalot
