#include "dsnfp/filter.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "dsnfp/dct.hpp"
#include "dsnfp/error.hpp"

namespace dsnfp {

namespace {

// 8-tap Daubechies scaling filter (sum sqrt(2), unit energy).
constexpr std::array<double, 8> kDb8 = {
    0.230377813308855230, 0.714846570552541500, 0.630880767929590400,
    -0.027983769416983850, -0.187034811718881140, 0.030841381835986965,
    0.032883011666982945, -0.010597401784997278,
};

struct WaveletFilters {
    std::array<double, 8> lo;
    std::array<double, 8> hi;
    WaveletFilters() {
        lo = kDb8;
        for (int k = 0; k < 8; ++k) hi[k] = (k % 2 ? -1.0 : 1.0) * lo[7 - k];
    }
};
const WaveletFilters kFilters;

// One circular analysis step along a length-n vector (n even):
// approx[i] = sum_k lo[k] x[(2i+k) mod n], detail likewise with hi.
void analyze_1d(const double* x, int n, double* approx, int stride_in, double* detail) {
    const int half = n / 2;
    for (int i = 0; i < half; ++i) {
        double a = 0.0, d = 0.0;
        for (int k = 0; k < 8; ++k) {
            int idx = 2 * i + k;
            if (idx >= n) idx -= n; // n >= 2 and k < 8 means at most one extra wrap
            if (idx >= n) idx -= n;
            if (idx >= n) idx -= n;
            const double v = x[static_cast<std::size_t>(idx) * stride_in];
            a += kFilters.lo[k] * v;
            d += kFilters.hi[k] * v;
        }
        approx[i] = a;
        detail[i] = d;
    }
}

// Synthesis transpose of analyze_1d: x[m] = sum_i a[i] lo[m-2i] + d[i] hi[m-2i] (circular).
void synthesize_1d(const double* approx, const double* detail, int n, double* x, int stride_out) {
    for (int m = 0; m < n; ++m) x[static_cast<std::size_t>(m) * stride_out] = 0.0;
    const int half = n / 2;
    for (int i = 0; i < half; ++i) {
        const double a = approx[i], d = detail[i];
        for (int k = 0; k < 8; ++k) {
            int idx = 2 * i + k;
            if (idx >= n) idx -= n;
            if (idx >= n) idx -= n;
            if (idx >= n) idx -= n;
            x[static_cast<std::size_t>(idx) * stride_out] += kFilters.lo[k] * a + kFilters.hi[k] * d;
        }
    }
}

// Forward one 2D level in place over the top-left region w x h of `plane`
// (quadrant layout: LL | HL over LH | HH).
void dwt_level(Plane& plane, int w, int h) {
    std::vector<double> row(w), approx(w / 2), detail(w / 2);
    for (int y = 0; y < h; ++y) {
        double* base = plane.data.data() + static_cast<std::size_t>(y) * plane.width;
        std::copy(base, base + w, row.begin());
        analyze_1d(row.data(), w, approx.data(), 1, detail.data());
        std::copy(approx.begin(), approx.end(), base);
        std::copy(detail.begin(), detail.end(), base + w / 2);
    }
    std::vector<double> col(h), capprox(h / 2), cdetail(h / 2);
    for (int x = 0; x < w; ++x) {
        double* base = plane.data.data() + x;
        for (int y = 0; y < h; ++y) col[y] = base[static_cast<std::size_t>(y) * plane.width];
        analyze_1d(col.data(), h, capprox.data(), 1, cdetail.data());
        for (int y = 0; y < h / 2; ++y) base[static_cast<std::size_t>(y) * plane.width] = capprox[y];
        for (int y = 0; y < h / 2; ++y)
            base[static_cast<std::size_t>(y + h / 2) * plane.width] = cdetail[y];
    }
}

void idwt_level(Plane& plane, int w, int h) {
    std::vector<double> col(h);
    for (int x = 0; x < w; ++x) {
        double* base = plane.data.data() + x;
        std::vector<double> capprox(h / 2), cdetail(h / 2);
        for (int y = 0; y < h / 2; ++y) capprox[y] = base[static_cast<std::size_t>(y) * plane.width];
        for (int y = 0; y < h / 2; ++y)
            cdetail[y] = base[static_cast<std::size_t>(y + h / 2) * plane.width];
        synthesize_1d(capprox.data(), cdetail.data(), h, col.data(), 1);
        for (int y = 0; y < h; ++y) base[static_cast<std::size_t>(y) * plane.width] = col[y];
    }
    std::vector<double> row(w), approx(w / 2), detail(w / 2);
    for (int y = 0; y < h; ++y) {
        double* base = plane.data.data() + static_cast<std::size_t>(y) * plane.width;
        std::copy(base, base + w / 2, approx.begin());
        std::copy(base + w / 2, base + w, detail.begin());
        synthesize_1d(approx.data(), detail.data(), w, row.data(), 1);
        std::copy(row.begin(), row.end(), base);
    }
}

// Mean of squares over clamped square windows via a summed-area table, then
// Wiener attenuation with the minimum-variance estimate across window sizes.
void wiener_attenuate(Plane& plane, int x0, int y0, int bw, int bh, double sigma0_sq) {
    if (bw <= 0 || bh <= 0) return;
    const std::size_t n = static_cast<std::size_t>(bw) * bh;
    std::vector<double> sq(n);
    for (int y = 0; y < bh; ++y)
        for (int x = 0; x < bw; ++x) {
            const double v = plane.at(x0 + x, y0 + y);
            sq[static_cast<std::size_t>(y) * bw + x] = v * v;
        }

    // integral[(y+1)*(bw+1) + (x+1)] = sum of sq over [0..x] x [0..y]
    std::vector<double> integral(static_cast<std::size_t>(bw + 1) * (bh + 1), 0.0);
    for (int y = 0; y < bh; ++y) {
        double rowsum = 0.0;
        for (int x = 0; x < bw; ++x) {
            rowsum += sq[static_cast<std::size_t>(y) * bw + x];
            integral[static_cast<std::size_t>(y + 1) * (bw + 1) + (x + 1)] =
                integral[static_cast<std::size_t>(y) * (bw + 1) + (x + 1)] + rowsum;
        }
    }
    auto window_mean = [&](int x, int y, int r) {
        const int xl = std::max(0, x - r), xr = std::min(bw - 1, x + r);
        const int yl = std::max(0, y - r), yr = std::min(bh - 1, y + r);
        const double sum = integral[static_cast<std::size_t>(yr + 1) * (bw + 1) + (xr + 1)] -
                           integral[static_cast<std::size_t>(yl) * (bw + 1) + (xr + 1)] -
                           integral[static_cast<std::size_t>(yr + 1) * (bw + 1) + xl] +
                           integral[static_cast<std::size_t>(yl) * (bw + 1) + xl];
        return sum / ((xr - xl + 1) * (yr - yl + 1));
    };

    for (int y = 0; y < bh; ++y) {
        for (int x = 0; x < bw; ++x) {
            double v = std::numeric_limits<double>::infinity();
            for (int r : {1, 2, 3, 4}) { // windows 3,5,7,9
                v = std::min(v, window_mean(x, y, r) - sigma0_sq);
            }
            v = std::max(v, 0.0);
            plane.at(x0 + x, y0 + y) *= v / (v + sigma0_sq);
        }
    }
}

// reflect without repeating the edge sample (period 2n-2), folding as many
// times as the padding requires; degenerate n=1 maps everything to 0
int reflect_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * n - 2;
    i %= period;
    return i < n ? i : period - i;
}

Plane pad_reflect(const Plane& src, int pw, int ph) {
    Plane out(pw, ph);
    for (int y = 0; y < ph; ++y) {
        const int sy = reflect_index(y, src.height);
        for (int x = 0; x < pw; ++x) {
            out.at(x, y) = src.at(reflect_index(x, src.width), sy);
        }
    }
    return out;
}

} // namespace

Plane frame_to_plane(const Frame& frame) {
    Plane plane(frame.width, frame.height);
    for (std::size_t i = 0; i < frame.data.size(); ++i) plane.data[i] = frame.data[i];
    return plane;
}

double default_sigma0_sq(int bit_depth) {
    const double scale = std::pow(2.0, bit_depth - 8);
    return 9.0 * scale * scale;
}

Plane build_hp_mask(const DctFilterSpec& spec, int width, int height) {
    if (!(spec.cutoff_radians > 0.0) || !(spec.cutoff_radians < std::numbers::pi))
        raise(errc::invalid_param, "cutoff must be in (0, pi)");
    if (width < 1 || height < 1) raise(errc::invalid_param, "mask dimensions must be >= 1");

    const double sigma_sq = spec.cutoff_radians * spec.cutoff_radians / (2.0 * std::numbers::ln2);
    Plane gain(width, height);
    for (int v = 0; v < height; ++v) {
        const double fv = v * std::numbers::pi / height;
        for (int u = 0; u < width; ++u) {
            const double fu = u * std::numbers::pi / width;
            const double r_sq = fu * fu + fv * fv;
            gain.at(u, v) = 1.0 - std::exp(-r_sq / (2.0 * sigma_sq));
        }
    }
    return gain;
}

namespace {

// One gain mask per (cutoff, size); guarded so the batch paths stay reentrant.
const Plane& cached_hp_mask(const DctFilterSpec& spec, int width, int height) {
    static std::mutex mutex;
    static std::map<std::tuple<std::uint64_t, int, int>, std::unique_ptr<Plane>> cache;
    const auto key =
        std::make_tuple(std::bit_cast<std::uint64_t>(spec.cutoff_radians), width, height);
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it == cache.end()) {
        it = cache.emplace(key, std::make_unique<Plane>(build_hp_mask(spec, width, height))).first;
    }
    return *it->second;
}

} // namespace

ResiduePlane dct_residue(const Plane& plane, const DctFilterSpec& spec) {
    Plane coeffs = dct2(plane);
    const Plane& gain = cached_hp_mask(spec, plane.width, plane.height);
    for (std::size_t i = 0; i < coeffs.data.size(); ++i) coeffs.data[i] *= gain.data[i];
    return idct2(coeffs);
}

ResiduePlane dct_residue(const Frame& frame, const DctFilterSpec& spec) {
    return dct_residue(frame_to_plane(frame), spec);
}

ResiduePlane wavelet_residue(const Plane& plane, double sigma0_sq, int levels) {
    if (!(sigma0_sq > 0.0)) raise(errc::invalid_param, "sigma0_sq must be positive");
    if (levels < 1) raise(errc::invalid_param, "levels must be >= 1");
    if (plane.width < 1 || plane.height < 1)
        raise(errc::invalid_param, "plane dimensions must be >= 1");

    const int mult = 1 << levels;
    const int pw = (plane.width + mult - 1) / mult * mult;
    const int ph = (plane.height + mult - 1) / mult * mult;
    Plane work = (pw == plane.width && ph == plane.height) ? plane : pad_reflect(plane, pw, ph);

    // Analysis, then Wiener coring of each detail quadrant, then synthesis.
    std::vector<std::pair<int, int>> sizes;
    int w = pw, h = ph;
    for (int level = 0; level < levels; ++level) {
        dwt_level(work, w, h);
        sizes.emplace_back(w, h);
        w /= 2;
        h /= 2;
    }
    for (int level = 0; level < levels; ++level) {
        const auto [lw, lh] = sizes[static_cast<std::size_t>(level)];
        const int hw = lw / 2, hh = lh / 2;
        wiener_attenuate(work, hw, 0, lw - hw, hh, sigma0_sq);      // HL
        wiener_attenuate(work, 0, hh, hw, lh - hh, sigma0_sq);      // LH
        wiener_attenuate(work, hw, hh, lw - hw, lh - hh, sigma0_sq); // HH
    }
    for (int level = levels - 1; level >= 0; --level) {
        const auto [lw, lh] = sizes[static_cast<std::size_t>(level)];
        idwt_level(work, lw, lh);
    }

    ResiduePlane residue(plane.width, plane.height);
    for (int y = 0; y < plane.height; ++y)
        for (int x = 0; x < plane.width; ++x) residue.at(x, y) = plane.at(x, y) - work.at(x, y);
    return residue;
}

ResiduePlane wavelet_residue(const Frame& frame, double sigma0_sq, int levels) {
    return wavelet_residue(frame_to_plane(frame), sigma0_sq, levels);
}

} // namespace dsnfp
