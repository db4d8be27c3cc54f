#pragma once

// Shared test helpers: scratch directories, deterministic RNG for test data,
// and independent brute-force oracles kept free of the library's own
// transform/estimator code paths.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <vector>

#include "dsnfp/plane.hpp"

namespace testsup {

class TempDir {
public:
    TempDir() {
        static std::atomic<std::uint64_t> counter{0};
        const auto id = counter.fetch_add(1);
        path_ = std::filesystem::temp_directory_path() /
                ("dsnfp_test_" + std::to_string(::getpid()) + "_" + std::to_string(id));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// xorshift-based generator so test data never depends on std::random
/// distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    std::uint64_t next() {
        std::uint64_t x = state_;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        return state_ = x;
    }
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
    int uniform_int(int lo, int hi) { // inclusive
        return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }
    double gaussian() {
        const double u1 = std::max(unit(), 1e-300);
        const double u2 = unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t state_;
};

/// Direct O(N^4) orthonormal DCT-II evaluation. Compensated summation keeps
/// the oracle's own roundoff below the 1e-9 comparison tolerance at 16-bit
/// input scale.
inline dsnfp::Plane naive_dct2(const dsnfp::Plane& x) {
    const int w = x.width, h = x.height;
    dsnfp::Plane out(w, h);
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            double sum = 0.0, carry = 0.0;
            // cos(pi (2x+1) u / (2w)) with the argument reduced exactly in
            // integers (period 4w) so large products keep full precision
            auto basis = [](long long j, long long k, int n) {
                const long long m = ((2 * j + 1) * k) % (4LL * n);
                return std::cos(std::numbers::pi * static_cast<double>(m) / (2.0 * n));
            };
            for (int y = 0; y < h; ++y) {
                for (int xx = 0; xx < w; ++xx) {
                    const double term = x.at(xx, y) * basis(xx, u, w) * basis(y, v, h);
                    const double t = sum + term;
                    if (std::abs(sum) >= std::abs(term)) {
                        carry += (sum - t) + term;
                    } else {
                        carry += (term - t) + sum;
                    }
                    sum = t;
                }
            }
            const double su = u == 0 ? std::sqrt(1.0 / w) : std::sqrt(2.0 / w);
            const double sv = v == 0 ? std::sqrt(1.0 / h) : std::sqrt(2.0 / h);
            out.at(u, v) = su * sv * (sum + carry);
        }
    }
    return out;
}

inline double max_abs_diff(const dsnfp::Plane& a, const dsnfp::Plane& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

} // namespace testsup
