#include "dsnfp/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "dsnfp/error.hpp"

namespace dsnfp {

namespace {

constexpr double kRelTol = 1e-12;
constexpr int kMaxIterations = 200;

std::size_t distinct_temperatures(std::span<const FitPoint> points) {
    std::set<double> temps;
    for (const FitPoint& p : points) temps.insert(p.t_c);
    return temps.size();
}

double model_sse(std::span<const FitPoint> points, double a, double b) {
    double sse = 0.0;
    for (const FitPoint& p : points) {
        const double r = p.y - a * std::exp(b * p.t_c);
        sse += r * r;
    }
    return sse;
}

// Linear regression of ln y on t over the positive-y points.
bool log_domain_init(std::span<const FitPoint> points, double& a, double& b) {
    double st = 0.0, sl = 0.0, stt = 0.0, stl = 0.0;
    std::size_t n = 0;
    std::set<double> temps;
    for (const FitPoint& p : points) {
        if (p.y <= 0.0) continue;
        const double l = std::log(p.y);
        st += p.t_c;
        sl += l;
        stt += p.t_c * p.t_c;
        stl += p.t_c * l;
        temps.insert(p.t_c);
        ++n;
    }
    if (n < 2 || temps.size() < 2) return false;
    const double det = static_cast<double>(n) * stt - st * st;
    if (det == 0.0) return false;
    b = (static_cast<double>(n) * stl - st * sl) / det;
    a = std::exp((sl - b * st) / static_cast<double>(n));
    return true;
}

} // namespace

ExpFit fit_exponential(std::span<const FitPoint> points) {
    if (points.size() < 3 || distinct_temperatures(points) < 3)
        raise(errc::insufficient_data, "need >= 3 points with distinct temperatures");

    std::size_t n_positive = 0;
    double max_y = 0.0;
    for (const FitPoint& p : points) {
        if (p.y > 0.0) {
            ++n_positive;
            max_y = std::max(max_y, p.y);
        }
    }
    if (n_positive == 0) raise(errc::all_non_positive, "all y values are non-positive");

    ExpFit fit;
    fit.n_used = points.size();
    fit.n_dropped = points.size() - n_positive;

    if (!log_domain_init(points, fit.a, fit.b)) {
        fit.a = max_y;
        fit.b = 0.0;
    }

    // Damped Gauss-Newton in the linear domain over all points.
    double sse = model_sse(points, fit.a, fit.b);
    fit.converged = false;
    int iter = 0;
    for (; iter < kMaxIterations; ++iter) {
        double jtj00 = 0.0, jtj01 = 0.0, jtj11 = 0.0, jtr0 = 0.0, jtr1 = 0.0;
        for (const FitPoint& p : points) {
            const double e = std::exp(fit.b * p.t_c);
            const double f = fit.a * e;
            const double r = p.y - f;
            const double j0 = e;           // df/da
            const double j1 = fit.a * p.t_c * e; // df/db
            jtj00 += j0 * j0;
            jtj01 += j0 * j1;
            jtj11 += j1 * j1;
            jtr0 += j0 * r;
            jtr1 += j1 * r;
        }
        const double det = jtj00 * jtj11 - jtj01 * jtj01;
        if (det == 0.0 || !std::isfinite(det)) break;
        const double da = (jtj11 * jtr0 - jtj01 * jtr1) / det;
        const double db = (jtj00 * jtr1 - jtj01 * jtr0) / det;

        double lambda = 1.0;
        bool improved = false;
        double next_a = fit.a, next_b = fit.b, next_sse = sse;
        for (int halving = 0; halving < 40; ++halving) {
            const double ta = fit.a + lambda * da;
            const double tb = fit.b + lambda * db;
            const double s = model_sse(points, ta, tb);
            if (s < sse) {
                next_a = ta;
                next_b = tb;
                next_sse = s;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!improved) {
            fit.converged = true; // no descent direction left: at a minimum
            break;
        }
        const double rel = (sse - next_sse) / std::max(sse, 1e-300);
        fit.a = next_a;
        fit.b = next_b;
        sse = next_sse;
        if (rel < kRelTol) {
            fit.converged = true;
            break;
        }
    }
    fit.iterations = iter;
    fit.sse = sse;

    double mean = 0.0;
    for (const FitPoint& p : points) mean += p.y;
    mean /= static_cast<double>(points.size());
    double sst = 0.0;
    for (const FitPoint& p : points) sst += (p.y - mean) * (p.y - mean);

    double r2;
    if (sst > 0.0) {
        r2 = 1.0 - sse / sst;
    } else {
        r2 = sse <= 1e-30 ? 1.0 : 0.0;
    }
    const double n = static_cast<double>(points.size());
    // adj R^2 with p = 2; undefined denominator (n <= 3) falls back to R^2.
    fit.adj_r2 = n > 3.0 ? 1.0 - (1.0 - r2) * (n - 1.0) / (n - 3.0) : r2;
    return fit;
}

double activation_energy(double b_per_c, double t_ref_k) {
    if (!(t_ref_k > 0.0)) raise(errc::invalid_param, "t_ref_k must be positive");
    return kBoltzmannEvPerK * t_ref_k * t_ref_k * b_per_c - 2.0 * kBoltzmannEvPerK * t_ref_k;
}

double slope_from_activation_energy(double delta_e_ev, double t_ref_k) {
    if (!(t_ref_k > 0.0)) raise(errc::invalid_param, "t_ref_k must be positive");
    return 2.0 / t_ref_k + delta_e_ev / (kBoltzmannEvPerK * t_ref_k * t_ref_k);
}

ThermalFit identify_temperature(std::span<const FitPoint> points, const IdentifyOptions& options) {
    if (points.size() < 4 || distinct_temperatures(points) < 3)
        raise(errc::insufficient_data, "need >= 4 points spanning >= 3 distinct temperatures");
    if (!(options.grid_step_c > 0.0)) raise(errc::invalid_param, "grid step must be positive");

    std::vector<FitPoint> sorted(points.begin(), points.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const FitPoint& a, const FitPoint& b) { return a.t_c < b.t_c; });

    const double t_min = sorted.front().t_c;
    const double t_max = sorted.back().t_c;

    bool found = false;
    double best_sse = 0.0;
    double best_t = t_min;
    ExpFit best_fit;

    const double eps = options.grid_step_c * 1e-6;
    for (std::size_t step = 0;; ++step) {
        const double t_star = t_min + static_cast<double>(step) * options.grid_step_c;
        if (t_star > t_max + eps) break;

        std::size_t n_left = 0;
        while (n_left < sorted.size() && sorted[n_left].t_c <= t_star + eps) ++n_left;
        std::span<const FitPoint> left(sorted.data(), n_left);
        if (distinct_temperatures(left) < 3) continue;

        ExpFit fit;
        try {
            fit = fit_exponential(left);
        } catch (const Error&) {
            continue; // e.g. all-non-positive rising segment at this candidate
        }
        const double plateau = fit.a * std::exp(fit.b * t_star);
        double sse = fit.sse;
        for (std::size_t i = n_left; i < sorted.size(); ++i) {
            const double r = sorted[i].y - plateau;
            sse += r * r;
        }
        // strict improvement keeps the lowest t_star on ties
        if (!found || sse < best_sse) {
            found = true;
            best_sse = sse;
            best_t = t_star;
            best_fit = fit;
        }
    }
    if (!found) raise(errc::insufficient_data, "no feasible plateau candidate");
    if (!(best_fit.b > 0.0))
        raise(errc::monotone_decreasing, "no rising segment: fitted slope is not positive");

    ThermalFit result;
    result.a = best_fit.a;
    result.b = best_fit.b;
    result.adj_r2 = best_fit.adj_r2;
    result.t_star_c = best_t;
    result.forensic_low_c = best_t - options.forensic_half_width_c;
    result.forensic_high_c = best_t + options.forensic_half_width_c;
    result.t_ref_k = options.t_ref_k;
    result.delta_e_ev = activation_energy(best_fit.b, options.t_ref_k);
    result.total_sse = best_sse;
    result.converged = best_fit.converged;
    return result;
}

} // namespace dsnfp
