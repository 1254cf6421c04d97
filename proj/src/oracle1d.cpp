#include "nodalot/oracle1d.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "nodalot/errors.hpp"

namespace nodalot {

namespace {

// d/dc of integral |G - c| over the PL model: measure{G < c} - measure{G > c}.
double subgradient(const std::vector<double>& G, double h, double c) {
  double acc = 0.0;
  const size_t n = G.size() - 1;
  for (size_t i = 0; i < n; ++i) {
    const double a = G[i], b = G[i + 1];
    if (a <= c && b <= c) {
      acc += h;
    } else if (a >= c && b >= c) {
      acc -= h;
    } else {
      const double t = (c - a) / (b - a);  // crossing fraction, denominator != 0 here
      acc += a < b ? h * t - h * (1.0 - t) : h * (1.0 - t) - h * t;
    }
  }
  return acc;
}

double level_integral(const std::vector<double>& G, double h, double c) {
  double acc = 0.0;
  const size_t n = G.size() - 1;
  for (size_t i = 0; i < n; ++i) {
    const double u = G[i] - c, v = G[i + 1] - c;
    if (u * v >= 0.0) {
      acc += 0.5 * h * (std::abs(u) + std::abs(v));
    } else {
      // Segment crosses the level: two triangles of heights |u| and |v|.
      acc += 0.5 * h * (u * u + v * v) / (std::abs(u) + std::abs(v));
    }
  }
  return acc;
}

}  // namespace

double w1_oracle_circle(const std::function<double(double)>& g, double period,
                        double transverse, int samples) {
  if (!(period > 0.0) || !(transverse > 0.0))
    throw std::invalid_argument("w1_oracle_circle: lengths must be positive");
  if (samples < 16) throw std::invalid_argument("w1_oracle_circle: too few samples");
  const double h = period / samples;
  std::vector<double> values(static_cast<size_t>(samples) + 1);
  double abs_sum = 0.0;
  for (int i = 0; i <= samples; ++i) {
    values[static_cast<size_t>(i)] = g(i * h);
    abs_sum += std::abs(values[static_cast<size_t>(i)]) * h;
  }

  std::vector<double> G(static_cast<size_t>(samples) + 1, 0.0);
  for (int i = 0; i < samples; ++i)
    G[static_cast<size_t>(i) + 1] =
        G[static_cast<size_t>(i)] +
        0.5 * h * (values[static_cast<size_t>(i)] + values[static_cast<size_t>(i) + 1]);
  const double mean_defect = std::abs(G.back()) / period;
  if (mean_defect > 1e-8 * std::max(abs_sum / period, 1e-300))
    throw NonZeroMean("w1_oracle_circle: profile mean " + std::to_string(G.back() / period));
  // Close the loop exactly so the median search sees a true circle profile.
  const double drift = G.back() / samples;
  for (int i = 1; i <= samples; ++i) G[static_cast<size_t>(i)] -= drift * i;

  auto [lo_it, hi_it] = std::minmax_element(G.begin(), G.end());
  double lo = *lo_it, hi = *hi_it;
  if (hi - lo <= 0.0) return 0.0;
  for (int iter = 0; iter < 200 && hi - lo > 1e-15 * (std::abs(hi) + std::abs(lo) + 1.0);
       ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (subgradient(G, h, mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return transverse * level_integral(G, h, 0.5 * (lo + hi));
}

}  // namespace nodalot
