#pragma once

#include <cstdint>
#include <filesystem>

#include "dsnfp/frame.hpp"

namespace dsnfp {

inline constexpr double kDefaultExposureS = 1.0 / 1008.0;

/// Synthetic sensor ground truth. Dark generation follows
/// N_dark(x,y) = d(x,y) * j0 * T_K^2 * exp(-dE/(k T_K)) * exposure;
/// photo electrons are K(x,y) * illuminance * exposure; both share the well
/// (capacity n_max) and are Poisson/read-noise sampled per pixel.
struct SensorProfile {
    int width = 0;
    int height = 0;
    int bit_depth = 10;
    double n_max = 1000.0;        // well capacity, electrons
    double j0 = 0.0;              // electrons / (s * K^2)
    double delta_e_ev = 0.19;     // activation energy |E_t - E_G|
    double hot_pixel_fraction = 0.0;
    double read_noise_e = 2.0;    // RMS electrons
    std::uint64_t seed = 0;
    std::vector<float> dark_rate; // d(x,y), lognormal, median 1
    std::vector<float> prnu;      // K(x,y), lognormal, mean 1
    std::vector<std::uint32_t> hot_pixels; // derived from seed + fraction

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
    int max_value() const { return (1 << bit_depth) - 1; }
};

struct ProfileParams {
    int width = 256;
    int height = 256;
    int bit_depth = 10;
    double n_max = 1000.0;
    double j0 = 0.0;              // if 0, derived from dark_e_at_30c
    double dark_e_at_30c = 0.65;  // median-pixel dark electrons at 30 C, default exposure
    double delta_e_ev = 0.19;
    double dark_sigma_ln = 0.4;   // lognormal sigma of d(x,y)
    double prnu_sigma = 0.02;     // lognormal sigma of K(x,y)
    double hot_pixel_fraction = 0.001; // in [0, 0.05]
    double read_noise_e = 2.0;
    std::uint64_t seed = 1;
};

/// Deterministic profile generation: identical params + seed give bit-identical
/// maps on any platform (no std::random distributions, no entropy sources).
SensorProfile make_profile(const ProfileParams& params);

/// j0 such that the median pixel generates `electrons` dark electrons at
/// temperature t_c with the given exposure.
double j0_for_dark_electrons(double electrons, double delta_e_ev, double t_c,
                             double exposure_s = kDefaultExposureS);

/// Median-pixel expected dark electrons (d = 1) before noise and clipping.
double dark_mean_electrons(const SensorProfile& profile, double temperature_c,
                           double exposure_s);

/// Dark frame: aperture blocked, only dark current + read noise.
/// Noise streams are keyed by (seed, frame_index, pixel_index), so frames are
/// reproducible and independent of threading; reuse of a frame_index reuses
/// its underlying noise stream.
Frame capture_dark(const SensorProfile& profile, double temperature_c,
                   double exposure_s, std::uint64_t frame_index = 0);

/// Flat field: uniform illuminance (photons/pixel/s) through the PRNU gain
/// map plus the dark signal. illuminance 0 is bit-identical to capture_dark.
Frame capture_flat(const SensorProfile& profile, double temperature_c,
                   double exposure_s, double illuminance,
                   std::uint64_t frame_index = 0);

/// Profile persistence: `<base>` key=value text plus two headerless raw
/// float32 little-endian map files `<base>.dark.f32` and `<base>.prnu.f32`.
void save_profile(const SensorProfile& profile, const std::filesystem::path& base);
SensorProfile load_profile(const std::filesystem::path& base);

namespace detail {
/// Deterministic counter-based stream (splitmix64 over a mixed key).
class PixelRng {
public:
    PixelRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t pixel);
    std::uint64_t next_u64();
    double next_unit();     // uniform in (0, 1)
    double next_gaussian(); // Box-Muller, one value per call (pair cached)
    /// Exact for lambda <= 1000 (inversion below 10, transformed rejection
    /// above); Gaussian approximation beyond 1000.
    double poisson(double lambda);

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};
} // namespace detail

} // namespace dsnfp
