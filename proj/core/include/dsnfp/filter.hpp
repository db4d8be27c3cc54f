#pragma once

#include <numbers>

#include "dsnfp/frame.hpp"
#include "dsnfp/plane.hpp"

namespace dsnfp {

/// Signed noise residue Y = I - f(I) of a single frame.
using ResiduePlane = Plane;

inline constexpr double kDefaultCutoffRadians = 150.0 * std::numbers::pi / 1136.0;

/// Gaussian high-pass gain in the DCT domain. The cutoff is the half-gain
/// point: G = 0.5 exactly at radial frequency r = cutoff_radians.
struct DctFilterSpec {
    double cutoff_radians = kDefaultCutoffRadians; // in (0, pi)
};

/// Gain plane G(u,v) = 1 - exp(-r^2/(2 sigma^2)) with
/// r(u,v) = sqrt((u*pi/width)^2 + (v*pi/height)^2) and
/// sigma^2 = cutoff^2 / (2 ln 2). G(0,0) = 0; G is monotone in r.
Plane build_hp_mask(const DctFilterSpec& spec, int width, int height);

/// Y = idct2(G .* dct2(I)). Linear, annihilates constant frames.
ResiduePlane dct_residue(const Frame& frame, const DctFilterSpec& spec = {});
ResiduePlane dct_residue(const Plane& plane, const DctFilterSpec& spec = {});

/// Wavelet-coring baseline: residue = I - denoised(I), where denoised applies
/// per-coefficient Wiener attenuation v/(v + sigma0_sq) to the detail bands of
/// an orthogonal 8-tap Daubechies decomposition. The local signal variance v is
/// the minimum over square windows {3,5,7,9} of the mean squared coefficient
/// minus sigma0_sq, floored at 0. The approximation band passes unchanged.
/// Dimensions not divisible by 2^levels are handled by reflection padding.
ResiduePlane wavelet_residue(const Frame& frame, double sigma0_sq, int levels = 4);
ResiduePlane wavelet_residue(const Plane& plane, double sigma0_sq, int levels = 4);

/// Default coring noise variance: 9 DN^2 at 8 bits, scaled by (2^(bd-8))^2.
double default_sigma0_sq(int bit_depth);

/// Frame samples as reals.
Plane frame_to_plane(const Frame& frame);

} // namespace dsnfp
