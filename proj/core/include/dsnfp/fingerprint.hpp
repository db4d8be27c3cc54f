#pragma once

#include <span>

#include "dsnfp/filter.hpp"
#include "dsnfp/frame.hpp"

namespace dsnfp {

inline constexpr double kDefaultSaturationThreshold = 0.95;

/// Pixels excluded from fingerprints as saturated/hot.
struct SaturationMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits; // nonzero = saturated/excluded
    double threshold_fraction = kDefaultSaturationThreshold;

    SaturationMask() = default;
    SaturationMask(int w, int h, double threshold = kDefaultSaturationThreshold)
        : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0),
          threshold_fraction(threshold) {}
};

/// Union rule: a bit is set iff the pixel strictly exceeds
/// threshold_fraction * (2^bit_depth - 1) in at least one frame of the set.
SaturationMask saturation_mask(std::span<const Frame> frames,
                               double threshold_fraction = kDefaultSaturationThreshold);

/// Per-pixel arithmetic mean of the residues; masked pixels forced to 0; the
/// result is zero-meaned over unmasked pixels. Accumulation is fixed-order so
/// results are reproducible regardless of how the residues were produced.
ReferencePattern build_reference(std::span<const ResiduePlane> residues,
                                 const SaturationMask& mask,
                                 double temperature_c);

} // namespace dsnfp
