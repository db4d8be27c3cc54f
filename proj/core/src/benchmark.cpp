#include "dsnfp/benchmark.hpp"

#include <chrono>
#include <cstdio>
#include <functional>

#include "dsnfp/error.hpp"
#include "dsnfp/parallel.hpp"

namespace dsnfp {

namespace {

using Clock = std::chrono::steady_clock;

double time_filter(std::span<const Frame> frames, int repetitions, int threads,
                   const std::function<ResiduePlane(const Frame&)>& filter) {
    const auto start = Clock::now();
    volatile double sink = 0.0; // keep the residues from being optimized away
    for (int rep = 0; rep < repetitions; ++rep) {
        std::vector<double> sums(frames.size(), 0.0);
        parallel_for(frames.size(), threads, [&](std::size_t i) {
            const ResiduePlane r = filter(frames[i]);
            sums[i] = r.data.empty() ? 0.0 : r.data[0];
        });
        for (double s : sums) sink = sink + s;
    }
    (void)sink;
    return std::chrono::duration<double>(Clock::now() - start).count();
}

} // namespace

BenchmarkReport make_benchmark_report(std::size_t frames, double wavelet_s, double dct_s) {
    BenchmarkReport report;
    report.entries.push_back({"wavelet", frames, wavelet_s, 0.0, 0.0});
    const double delta = dct_s - wavelet_s;
    const double pct = wavelet_s > 0.0 ? delta / wavelet_s * 100.0 : 0.0;
    report.entries.push_back({"dct", frames, dct_s, delta, pct});
    return report;
}

BenchmarkReport run_filter_benchmark(std::span<const Frame> frames,
                                     const BenchmarkOptions& options) {
    if (frames.empty()) raise(errc::empty_set, "benchmark needs at least one frame");
    if (options.repetitions < 1) raise(errc::invalid_param, "repetitions must be >= 1");

    const double sigma0 =
        options.sigma0_sq > 0.0 ? options.sigma0_sq : default_sigma0_sq(frames[0].bit_depth);

    auto wavelet = [&](const Frame& f) { return wavelet_residue(f, sigma0, options.levels); };
    auto dct = [&](const Frame& f) { return dct_residue(f, options.dct); };

    // The comparison rows are always single-threaded so per-filter cost is
    // measured, not scheduling.
    const double wavelet_s = time_filter(frames, options.repetitions, 1, wavelet);
    const double dct_s = time_filter(frames, options.repetitions, 1, dct);
    BenchmarkReport report = make_benchmark_report(frames.size(), wavelet_s, dct_s);

    if (options.threads > 1) {
        const double wavelet_mt = time_filter(frames, options.repetitions, options.threads, wavelet);
        const double dct_mt = time_filter(frames, options.repetitions, options.threads, dct);
        const double delta = dct_mt - wavelet_mt;
        report.entries.push_back({"wavelet-mt", frames.size(), wavelet_mt, 0.0, 0.0});
        report.entries.push_back(
            {"dct-mt", frames.size(), dct_mt, delta,
             wavelet_mt > 0.0 ? delta / wavelet_mt * 100.0 : 0.0});
    }
    return report;
}

std::string benchmark_csv(const BenchmarkReport& report) {
    std::string out = "filter,frames,total_s,delta_s,delta_pct\n";
    char buf[160];
    for (const BenchmarkEntry& e : report.entries) {
        std::snprintf(buf, sizeof(buf), "%s,%zu,%.6f,%.6f,%.1f\n", e.filter.c_str(), e.frames,
                      e.total_s, e.delta_s, e.delta_pct);
        out += buf;
    }
    return out;
}

} // namespace dsnfp
