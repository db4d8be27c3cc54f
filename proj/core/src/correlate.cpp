#include "dsnfp/correlate.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "dsnfp/error.hpp"

namespace dsnfp {

CorrelationResult masked_corr(const ResiduePlane& residue, const ReferencePattern& pattern,
                              const SaturationMask* extra_mask) {
    if (residue.width != pattern.width || residue.height != pattern.height)
        raise(errc::dimension_mismatch, "residue and pattern dimensions differ");
    if (extra_mask &&
        (extra_mask->width != pattern.width || extra_mask->height != pattern.height))
        raise(errc::dimension_mismatch, "extra mask dimensions differ");

    const std::size_t n = residue.size();
    // Two-pass Pearson over the jointly unmasked pixels.
    double sx = 0.0, sy = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (pattern.mask[i] || (extra_mask && extra_mask->bits[i])) continue;
        sx += residue.data[i];
        sy += pattern.data[i];
        ++count;
    }
    if (count < 2) raise(errc::degenerate_input, "fewer than 2 jointly unmasked pixels");

    const double mx = sx / static_cast<double>(count);
    const double my = sy / static_cast<double>(count);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (pattern.mask[i] || (extra_mask && extra_mask->bits[i])) continue;
        const double dx = residue.data[i] - mx;
        const double dy = pattern.data[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        raise(errc::degenerate_input, "zero variance over the included pixels");

    return {sxy / (std::sqrt(sxx) * std::sqrt(syy)), count};
}

std::vector<TemperatureGroup> correlation_series(std::span<const CorrelationRecord> records) {
    if (records.empty()) raise(errc::empty_set, "correlation_series needs at least one record");
    std::map<double, std::pair<double, std::size_t>> groups; // temp -> (sum, count)
    for (const CorrelationRecord& r : records) {
        auto& g = groups[r.pattern_temperature_c];
        g.first += r.rho;
        g.second += 1;
    }
    std::vector<TemperatureGroup> out;
    out.reserve(groups.size());
    for (const auto& [temp, g] : groups) {
        out.push_back({temp, g.first / static_cast<double>(g.second), g.second});
    }
    return out; // std::map iterates ascending
}

} // namespace dsnfp
