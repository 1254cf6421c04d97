#include "nodalot/legendre.hpp"

#include <cassert>
#include <cmath>

namespace nodalot {

namespace {

constexpr double kInv4Pi = 0.07957747154594766788;  // 1/(4 pi)

// Ladder in l at fixed m.  Returns P_l and, if lower != nullptr, P_{l-1}.
double ladder(int l, int m, double ct, double st, double* lower) {
  double pmm = std::sqrt(kInv4Pi);
  for (int k = 1; k <= m; ++k) pmm *= st * std::sqrt((2.0 * k + 1.0) / (2.0 * k));
  double prev = 0.0, cur = pmm;
  for (int ll = m + 1; ll <= l; ++ll) {
    const double a = std::sqrt((4.0 * ll * ll - 1.0) / (static_cast<double>(ll) * ll - static_cast<double>(m) * m));
    const double b = (ll - 1 > m || ll - 1 == m)
                         ? std::sqrt((static_cast<double>(ll - 1) * (ll - 1) - static_cast<double>(m) * m) /
                                     (4.0 * static_cast<double>(ll - 1) * (ll - 1) - 1.0))
                         : 0.0;
    const double next = a * (ct * cur - b * prev);
    prev = cur;
    cur = next;
  }
  if (lower) *lower = (l == m) ? 0.0 : prev;
  return cur;
}

}  // namespace

double normalized_legendre(int l, int m, double theta) {
  assert(0 <= m && m <= l);
  return ladder(l, m, std::cos(theta), std::sin(theta), nullptr);
}

double normalized_legendre_dtheta(int l, int m, double theta) {
  assert(0 <= m && m <= l);
  const double ct = std::cos(theta), st = std::sin(theta);
  if (std::abs(st) < 1e-14) {
    // Pole limits: the theta-derivative vanishes unless m == 1, and callers
    // handle the m == 1 frame singularity before reaching here.
    return 0.0;
  }
  double below = 0.0;
  const double here = ladder(l, m, ct, st, &below);
  double coupling = 0.0;
  if (l > m)
    coupling = std::sqrt((static_cast<double>(l) * l - static_cast<double>(m) * m) * (2.0 * l + 1.0) / (2.0 * l - 1.0));
  // sin(theta) * d/dtheta P_l^m = l cos(theta) P_l^m - coupling * P_{l-1}^m
  return (l * ct * here - coupling * below) / st;
}

}  // namespace nodalot
