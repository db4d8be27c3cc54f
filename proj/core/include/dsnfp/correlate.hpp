#pragma once

#include <span>
#include <string>
#include <vector>

#include "dsnfp/fingerprint.hpp"

namespace dsnfp {

/// One query-image-versus-pattern correlation datum.
struct CorrelationRecord {
    std::string camera_id;
    std::string lens_id;
    double pattern_temperature_c = 0.0;
    double rho = 0.0;
    std::size_t n_pixels = 0;
};

struct CorrelationResult {
    double rho = 0.0;
    std::size_t n_pixels = 0;
};

/// Pearson correlation over pixels unmasked in both pattern.mask and
/// extra_mask. Requires >= 2 jointly unmasked pixels and nonzero variance on
/// both sides; zero variance raises degenerate_input rather than returning 0.
CorrelationResult masked_corr(const ResiduePlane& residue,
                              const ReferencePattern& pattern,
                              const SaturationMask* extra_mask = nullptr);

struct TemperatureGroup {
    double temperature_c = 0.0;
    double mean_rho = 0.0;
    std::size_t count = 0;
};

/// Groups records by exact pattern temperature and averages rho per group;
/// output sorted ascending by temperature.
std::vector<TemperatureGroup> correlation_series(std::span<const CorrelationRecord> records);

} // namespace dsnfp
