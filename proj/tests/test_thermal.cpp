#include <doctest.h>

#include <cmath>
#include <vector>

#include "dsnfp/error.hpp"
#include "dsnfp/thermal.hpp"
#include "support.hpp"

using namespace dsnfp;

namespace {

std::vector<FitPoint> grid_series(double a, double b, double plateau_t) {
    std::vector<FitPoint> points;
    for (double t = 10.0; t <= 50.0 + 1e-9; t += 5.0)
        points.push_back({t, a * std::exp(b * std::min(t, plateau_t))});
    return points;
}

// dense grid search over (ln a, b), refined once; independent of the
// Gauss-Newton implementation path
std::pair<double, double> grid_search_fit(const std::vector<FitPoint>& pts) {
    double best_la = 0, best_b = 0, best_sse = 1e300;
    auto sse_of = [&](double la, double b) {
        double s = 0;
        for (const auto& p : pts) {
            const double r = p.y - std::exp(la) * std::exp(b * p.t_c);
            s += r * r;
        }
        return s;
    };
    double la_lo = std::log(1e-4), la_hi = std::log(10.0), b_lo = -0.2, b_hi = 0.2;
    for (int pass = 0; pass < 4; ++pass) {
        const int steps = 60;
        for (int i = 0; i <= steps; ++i) {
            for (int j = 0; j <= steps; ++j) {
                const double la = la_lo + (la_hi - la_lo) * i / steps;
                const double b = b_lo + (b_hi - b_lo) * j / steps;
                const double s = sse_of(la, b);
                if (s < best_sse) {
                    best_sse = s;
                    best_la = la;
                    best_b = b;
                }
            }
        }
        const double la_span = (la_hi - la_lo) / steps * 4, b_span = (b_hi - b_lo) / steps * 4;
        la_lo = best_la - la_span;
        la_hi = best_la + la_span;
        b_lo = best_b - b_span;
        b_hi = best_b + b_span;
    }
    return {std::exp(best_la), best_b};
}

} // namespace

TEST_CASE("noiseless exponential is recovered exactly") {
    std::vector<FitPoint> pts;
    for (double t = 10.0; t <= 50.0 + 1e-9; t += 5.0) pts.push_back({t, 2.0 * std::exp(0.03 * t)});
    const ExpFit fit = fit_exponential(pts);
    CHECK(fit.a == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(fit.b == doctest::Approx(0.03).epsilon(1e-9));
    CHECK(fit.adj_r2 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fit.converged);
    CHECK(fit.n_dropped == 0);
}

TEST_CASE("constant data degenerates to b = 0") {
    std::vector<FitPoint> pts{{10, 3.5}, {20, 3.5}, {30, 3.5}, {40, 3.5}};
    const ExpFit fit = fit_exponential(pts);
    CHECK(fit.a == doctest::Approx(3.5).epsilon(1e-9));
    CHECK(std::abs(fit.b) < 1e-9);
}

TEST_CASE("noisy series matches an independent dense grid search to 3 significant figures") {
    // frozen noisy realization of y = 0.04 exp(0.0306 t), +/-2% multiplicative
    const std::vector<FitPoint> pts{
        {10, 0.053448085312668564}, {15, 0.06162299947311898}, {20, 0.07339823169396027},
        {25, 0.08668260254737152}, {30, 0.10244705297792306}, {35, 0.11698797813279599},
        {40, 0.1345270064078432},  {45, 0.15603172730309098}, {50, 0.18749334518335245}};
    const ExpFit fit = fit_exponential(pts);
    const auto [oracle_a, oracle_b] = grid_search_fit(pts);
    CHECK(fit.a == doctest::Approx(oracle_a).epsilon(5e-3));
    CHECK(fit.b == doctest::Approx(oracle_b).epsilon(5e-3));
    // mirrors the kind of fit quality reported for real hardware
    CHECK(fit.adj_r2 >= 0.94);
}

TEST_CASE("fit reports dropped non-positive points but still uses them in refinement") {
    std::vector<FitPoint> pts{{10, -0.001}, {20, 0.05}, {30, 0.09}, {40, 0.17}, {50, 0.33}};
    const ExpFit fit = fit_exponential(pts);
    CHECK(fit.n_dropped == 1);
    CHECK(fit.n_used == 5);
    CHECK(fit.b > 0.0);
}

TEST_CASE("fit errors: insufficient data and all-non-positive") {
    std::vector<FitPoint> two{{10, 1.0}, {20, 2.0}};
    CHECK_THROWS_AS(fit_exponential(two), Error);
    std::vector<FitPoint> repeated{{10, 1.0}, {10, 2.0}, {10, 3.0}};
    CHECK_THROWS_AS(fit_exponential(repeated), Error);
    std::vector<FitPoint> nonpos{{10, -1.0}, {20, 0.0}, {30, -0.5}};
    try {
        fit_exponential(nonpos);
        FAIL("expected AllNonPositive");
    } catch (const Error& e) {
        CHECK(e.code() == errc::all_non_positive);
    }
}

TEST_CASE("scale equivariance: y -> alpha y scales a, fixes b and adj_r2") {
    const std::vector<FitPoint> pts{
        {10, 0.053448085312668564}, {15, 0.06162299947311898}, {20, 0.07339823169396027},
        {25, 0.08668260254737152}, {30, 0.10244705297792306}, {35, 0.11698797813279599},
        {40, 0.1345270064078432},  {45, 0.15603172730309098}, {50, 0.18749334518335245}};
    const ExpFit base = fit_exponential(pts);
    std::vector<FitPoint> scaled = pts;
    for (auto& p : scaled) p.y *= 7.5;
    const ExpFit fit = fit_exponential(scaled);
    CHECK(fit.a == doctest::Approx(7.5 * base.a).epsilon(1e-9));
    CHECK(fit.b == doctest::Approx(base.b).epsilon(1e-9));
    CHECK(fit.adj_r2 == doctest::Approx(base.adj_r2).epsilon(1e-9));
}

TEST_CASE("piecewise-exact data puts the breakpoint on the true plateau onset") {
    const auto pts = grid_series(1.0, 0.03, 30.0);
    const ThermalFit fit = identify_temperature(pts);
    CHECK(std::abs(fit.t_star_c - 30.0) < 0.051);
    CHECK(fit.forensic_low_c == doctest::Approx(fit.t_star_c - 4.5));
    CHECK(fit.forensic_high_c == doctest::Approx(fit.t_star_c + 4.5));
    CHECK(fit.b == doctest::Approx(0.03).epsilon(1e-6));
}

TEST_CASE("identified temperatures and forensic ranges reproduce the reported table shape") {
    // three capture temperatures with slopes implied by the three band-gap
    // energies; ranges are t* +/- 4.5
    struct Fixture {
        double t_star;
        double delta_e;
        double lo;
        double hi;
    };
    const std::vector<Fixture> fixtures{
        {30.5, 0.1896, 26.0, 35.0},
        {28.35, 0.3676, 23.85, 32.85},
        {30.15, 0.1268, 25.65, 34.65},
    };
    for (const auto& fx : fixtures) {
        const double b = slope_from_activation_energy(fx.delta_e);
        const auto pts = grid_series(0.05, b, fx.t_star);
        const ThermalFit fit = identify_temperature(pts);
        CHECK(std::abs(fit.t_star_c - fx.t_star) < 1e-6);
        CHECK(fit.forensic_low_c == doctest::Approx(fx.lo).epsilon(1e-9));
        CHECK(fit.forensic_high_c == doctest::Approx(fx.hi).epsilon(1e-9));
        CHECK(fit.delta_e_ev == doctest::Approx(fx.delta_e).epsilon(1e-6));
    }
}

TEST_CASE("identify_temperature requires enough distinct temperatures") {
    std::vector<FitPoint> three{{10, 1}, {20, 2}, {30, 3}};
    CHECK_THROWS_AS(identify_temperature(three), Error);
    std::vector<FitPoint> spanning{{10, 1}, {10, 1.1}, {20, 2}, {20, 2.1}};
    CHECK_THROWS_AS(identify_temperature(spanning), Error);
}

TEST_CASE("monotone decreasing series cannot be identified") {
    std::vector<FitPoint> pts;
    for (double t = 10.0; t <= 50.0 + 1e-9; t += 5.0)
        pts.push_back({t, std::exp(-0.02 * t)});
    try {
        identify_temperature(pts);
        FAIL("expected MonotoneDecreasing");
    } catch (const Error& e) {
        CHECK(e.code() == errc::monotone_decreasing);
    }
}

TEST_CASE("t* is invariant to positive scaling within one grid step") {
    auto pts = grid_series(0.03, 0.0306, 28.35);
    const ThermalFit base = identify_temperature(pts);
    for (auto& p : pts) p.y *= 40.0;
    const ThermalFit scaled = identify_temperature(pts);
    CHECK(std::abs(scaled.t_star_c - base.t_star_c) <= 0.05 + 1e-9);
}

TEST_CASE("shifting all temperatures shifts t* and preserves b") {
    auto pts = grid_series(0.03, 0.0306, 30.0);
    const ThermalFit base = identify_temperature(pts);
    std::vector<FitPoint> shifted = pts;
    for (auto& p : shifted) p.t_c += 7.0;
    const ThermalFit moved = identify_temperature(shifted);
    CHECK(std::abs(moved.t_star_c - (base.t_star_c + 7.0)) <= 0.05 + 1e-9);
    CHECK(moved.b == doctest::Approx(base.b).epsilon(1e-6));
}

TEST_CASE("activation energy matches the slope-matching rule") {
    // b = 2/T exactly: the T^2 prefactor explains the whole slope
    CHECK(std::abs(activation_energy(2.0 / 303.15, 303.15)) < 1e-15);
    // frozen spot value computed from k T^2 b - 2 k T
    CHECK(activation_energy(0.0306, 303.15) ==
          doctest::Approx(0.19008437388714788).epsilon(1e-12));
}

TEST_CASE("activation energy is linear in b and exactly invertible") {
    const double t_ref = 303.15;
    for (double b : {-0.01, 0.0, 0.0113, 0.0306, 0.08}) {
        const double de = activation_energy(b, t_ref);
        CHECK(slope_from_activation_energy(de, t_ref) == doctest::Approx(b).epsilon(1e-12));
    }
    const double d1 = activation_energy(0.01, t_ref);
    const double d2 = activation_energy(0.02, t_ref);
    const double d3 = activation_energy(0.03, t_ref);
    CHECK((d3 - d2) == doctest::Approx(d2 - d1).epsilon(1e-9));
    CHECK_THROWS_AS(activation_energy(0.03, -1.0), Error);
}

TEST_CASE("reference band-gap values map to plausible per-degree slopes") {
    // frozen from the slope-matching rule at 303.15 K
    CHECK(slope_from_activation_energy(0.1896) ==
          doctest::Approx(0.030538836447636768).epsilon(1e-12));
    CHECK(slope_from_activation_energy(0.3676) ==
          doctest::Approx(0.05301550707239177).epsilon(1e-12));
    CHECK(slope_from_activation_energy(0.1268) ==
          doctest::Approx(0.02260886501373444).epsilon(1e-12));
}
