#include "dsnfp/fingerprint.hpp"

#include <cmath>

#include "dsnfp/error.hpp"

namespace dsnfp {

SaturationMask saturation_mask(std::span<const Frame> frames, double threshold_fraction) {
    if (frames.empty()) raise(errc::empty_set, "saturation_mask needs at least one frame");
    if (!(threshold_fraction > 0.0) || !(threshold_fraction < 1.0))
        raise(errc::invalid_param, "threshold_fraction must be in (0, 1)");

    const Frame& first = frames[0];
    for (const Frame& f : frames) {
        if (f.width != first.width || f.height != first.height || f.bit_depth != first.bit_depth)
            raise(errc::dimension_mismatch, "frames differ in dimensions or bit depth");
    }

    SaturationMask mask(first.width, first.height, threshold_fraction);
    // Strictly greater than the threshold: saturated in at least one frame.
    const double limit = threshold_fraction * first.max_value();
    for (const Frame& f : frames) {
        for (std::size_t i = 0; i < f.data.size(); ++i) {
            if (f.data[i] > limit) mask.bits[i] = 1;
        }
    }
    return mask;
}

ReferencePattern build_reference(std::span<const ResiduePlane> residues,
                                 const SaturationMask& mask, double temperature_c) {
    if (residues.empty()) raise(errc::empty_set, "build_reference needs at least one residue");
    const ResiduePlane& first = residues[0];
    for (const ResiduePlane& r : residues) {
        if (r.width != first.width || r.height != first.height)
            raise(errc::dimension_mismatch, "residues differ in dimensions");
    }
    if (mask.width != first.width || mask.height != first.height)
        raise(errc::dimension_mismatch, "mask dimensions do not match residues");

    const std::size_t n = first.size();
    std::vector<double> acc(n, 0.0);
    for (const ResiduePlane& r : residues) {
        for (std::size_t i = 0; i < n; ++i) acc[i] += r.data[i];
    }
    const double inv_count = 1.0 / static_cast<double>(residues.size());

    double mean = 0.0;
    std::size_t unmasked = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!mask.bits[i]) {
            mean += acc[i] * inv_count;
            ++unmasked;
        }
    }
    mean = unmasked ? mean / static_cast<double>(unmasked) : 0.0;

    ReferencePattern pattern;
    pattern.width = first.width;
    pattern.height = first.height;
    pattern.frame_count = static_cast<std::uint32_t>(residues.size());
    pattern.temperature_c = temperature_c;
    pattern.data.resize(n);
    pattern.mask.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        pattern.mask[i] = mask.bits[i] ? 1 : 0;
        pattern.data[i] =
            mask.bits[i] ? 0.0f : static_cast<float>(acc[i] * inv_count - mean);
    }
    return pattern;
}

} // namespace dsnfp
