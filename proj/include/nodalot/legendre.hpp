#pragma once

namespace nodalot {

// Fully normalized associated Legendre function \bar P_l^m(cos theta):
// the colatitude part of the orthonormal real spherical harmonics, stable up
// to degrees in the thousands (the (2m-1)!! growth is absorbed into the
// running normalization).  Requires 0 <= m <= l.
double normalized_legendre(int l, int m, double theta);

// d/dtheta of the above.  Finite away from the poles; at the poles only the
// m = 0 and m >= 2 limits exist (both are 0 except m = 1).
double normalized_legendre_dtheta(int l, int m, double theta);

}  // namespace nodalot
