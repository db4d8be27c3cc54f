#pragma once

#include <span>
#include <string>
#include <vector>

#include "dsnfp/filter.hpp"

namespace dsnfp {

struct BenchmarkEntry {
    std::string filter;   // "wavelet", "dct" (suffix "-mt" for the parallel pass)
    std::size_t frames = 0;
    double total_s = 0.0;
    double delta_s = 0.0;   // this filter minus the wavelet baseline
    double delta_pct = 0.0; // delta_s / wavelet total * 100
};

struct BenchmarkReport {
    std::vector<BenchmarkEntry> entries;
};

struct BenchmarkOptions {
    int repetitions = 1;
    DctFilterSpec dct;
    double sigma0_sq = 0.0; // 0 = default for the frames' bit depth
    int levels = 4;
    int threads = 1;        // > 1 adds a separately reported parallel pass
};

/// Times wavelet_residue and dct_residue over preloaded frames (no file I/O in
/// the timed region). The mandatory comparison rows are single-threaded; a
/// threads > 1 option appends "-mt" rows timed with frame-level parallelism.
BenchmarkReport run_filter_benchmark(std::span<const Frame> frames,
                                     const BenchmarkOptions& options = {});

/// Report assembly from measured totals (delta/percent semantics).
BenchmarkReport make_benchmark_report(std::size_t frames, double wavelet_s, double dct_s);

/// CSV rows: filter,frames,total_s,delta_s,delta_pct (with header).
std::string benchmark_csv(const BenchmarkReport& report);

} // namespace dsnfp
