#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dsnfp {

/// Capture metadata carried in a `<file>.meta` sidecar, never in the raster itself.
struct FrameMeta {
    std::optional<double> temperature_c;
    std::optional<double> exposure_s;
    std::string camera_id;
    std::string lens_id;

    bool empty() const {
        return !temperature_c && !exposure_s && camera_id.empty() && lens_id.empty();
    }
};

/// Single-plane integer raster. Samples are row-major in [0, 2^bit_depth - 1].
struct Frame {
    int width = 0;
    int height = 0;
    int bit_depth = 0; // 8..16
    std::vector<std::uint16_t> data;
    FrameMeta meta;

    int max_value() const { return (1 << bit_depth) - 1; }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

/// Averaged noise residue for one device at one temperature.
/// Masked positions (mask byte nonzero) always carry data value exactly 0.
/// Values are float32 so that disk round trips are bit-exact; temperature is
/// stored on disk in centi-degrees (0.01 C resolution).
struct ReferencePattern {
    int width = 0;
    int height = 0;
    std::vector<float> data;
    std::vector<std::uint8_t> mask; // nonzero = excluded/saturated
    std::uint32_t frame_count = 0;
    double temperature_c = 0.0;

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

} // namespace dsnfp
