#pragma once

#include <span>
#include <vector>

namespace dsnfp {

inline constexpr double kBoltzmannEvPerK = 8.617333e-5;
inline constexpr double kDefaultTRefK = 303.15;
inline constexpr double kDefaultForensicHalfWidthC = 4.5;
inline constexpr double kDefaultGridStepC = 0.05;

struct FitPoint {
    double t_c = 0.0; // temperature, degrees Celsius
    double y = 0.0;   // observed value (mean correlation)
};

/// Result of fitting y = a * exp(b * t) by least squares in the linear domain.
struct ExpFit {
    double a = 0.0;
    double b = 0.0;
    double adj_r2 = 0.0;
    double sse = 0.0;
    bool converged = true;       // false: iteration cap hit (best iterate kept)
    int iterations = 0;
    std::size_t n_used = 0;      // points entering the linear-domain fit
    std::size_t n_dropped = 0;   // non-positive y, excluded from the log-domain init
};

/// Least-squares exponential fit: init by linear regression of ln y on t over
/// the positive points, then damped Gauss-Newton on all points until the
/// relative SSE change is < 1e-12 or 200 iterations. adj_r2 uses p = 2.
/// Requires >= 3 distinct temperatures and at least one positive y.
ExpFit fit_exponential(std::span<const FitPoint> points);

/// Slope-to-energy conversion at reference temperature T (Kelvin):
/// b = 2/T + dE/(k T^2) evaluated at T = t_ref_k, so
/// dE = k T^2 b - 2 k T, in eV. Linear in b; exactly invertible.
double activation_energy(double b_per_c, double t_ref_k = kDefaultTRefK);
double slope_from_activation_energy(double delta_e_ev, double t_ref_k = kDefaultTRefK);

struct IdentifyOptions {
    double grid_step_c = kDefaultGridStepC;
    double forensic_half_width_c = kDefaultForensicHalfWidthC;
    double t_ref_k = kDefaultTRefK;
};

/// Fit of the saturating model y(t) = a * exp(b * min(t, t_star)).
struct ThermalFit {
    double a = 0.0;
    double b = 0.0;
    double adj_r2 = 0.0;      // of the exponential fit over the rising segment
    double t_star_c = 0.0;
    double forensic_low_c = 0.0;
    double forensic_high_c = 0.0;
    double delta_e_ev = 0.0;
    double t_ref_k = kDefaultTRefK;
    double total_sse = 0.0;   // rising SSE + plateau SSE at the selected t_star
    bool converged = true;
};

/// Grid search for the plateau onset: t_star over [min t, max t] in grid_step
/// increments; for each candidate, fit_exponential on points with t <= t_star
/// plus plateau SSE on points with t > t_star evaluated at a*exp(b*t_star).
/// Minimal total SSE wins, ties resolved to the lowest t_star. A best fit with
/// b <= 0 means no rising segment and raises monotone_decreasing.
/// Requires >= 4 points spanning >= 3 distinct temperatures.
ThermalFit identify_temperature(std::span<const FitPoint> points,
                                const IdentifyOptions& options = {});

} // namespace dsnfp
