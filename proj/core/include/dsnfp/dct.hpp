#pragma once

#include "dsnfp/plane.hpp"

namespace dsnfp {

/// Orthonormal 2D DCT-II. idct2(dct2(x)) == x within 1e-9 per element for
/// inputs bounded by 2^16. A constant N x N plane of value c transforms to a
/// single (0,0) coefficient of c*N.
Plane dct2(const Plane& plane);

/// Orthonormal 2D DCT-III (inverse of dct2).
Plane idct2(const Plane& plane);

/// Sum of squares, used for Parseval checks.
double plane_energy(const Plane& plane);

} // namespace dsnfp
