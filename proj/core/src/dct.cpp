#include "dsnfp/dct.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "dsnfp/error.hpp"

namespace dsnfp {

namespace {

// FFTW plan creation is not thread-safe; creation is serialized and plans are
// cached per (height, width, kind). Execution uses the new-array interface on
// fftw_malloc'd buffers, which is re-entrant.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(int height, int width, fftw_r2r_kind kind) {
        const auto key = std::make_tuple(height, width, static_cast<int>(kind));
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        const std::size_t n = static_cast<std::size_t>(height) * width;
        double* in = fftw_alloc_real(n);
        double* out = fftw_alloc_real(n);
        fftw_plan plan = fftw_plan_r2r_2d(height, width, in, out, kind, kind, FFTW_ESTIMATE);
        fftw_free(in);
        fftw_free(out);
        if (!plan) raise(errc::invalid_param, "fftw plan creation failed");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

struct FftwBuffer {
    double* p;
    explicit FftwBuffer(std::size_t n) : p(fftw_alloc_real(n)) {}
    ~FftwBuffer() { fftw_free(p); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
};

void check_plane(const Plane& plane) {
    if (plane.width < 1 || plane.height < 1)
        raise(errc::invalid_param, "plane dimensions must be >= 1");
    if (plane.data.size() != plane.size())
        raise(errc::invalid_param, "plane data length does not match dimensions");
}

} // namespace

Plane dct2(const Plane& plane) {
    check_plane(plane);
    const int w = plane.width, h = plane.height;
    const std::size_t n = plane.size();

    FftwBuffer in(n), out(n);
    std::copy(plane.data.begin(), plane.data.end(), in.p);
    fftw_execute_r2r(PlanCache::instance().get(h, w, FFTW_REDFT10), in.p, out.p);

    // FFTW REDFT10 is 2x the cosine sum per dimension; rescale to orthonormal.
    Plane result(w, h);
    const double s0w = std::sqrt(1.0 / w) / 2.0, sw = std::sqrt(2.0 / w) / 2.0;
    const double s0h = std::sqrt(1.0 / h) / 2.0, sh = std::sqrt(2.0 / h) / 2.0;
    for (int y = 0; y < h; ++y) {
        const double fy = (y == 0) ? s0h : sh;
        for (int x = 0; x < w; ++x) {
            const double fx = (x == 0) ? s0w : sw;
            result.data[static_cast<std::size_t>(y) * w + x] =
                out.p[static_cast<std::size_t>(y) * w + x] * fx * fy;
        }
    }
    return result;
}

Plane idct2(const Plane& plane) {
    check_plane(plane);
    const int w = plane.width, h = plane.height;
    const std::size_t n = plane.size();

    // Pre-scale so REDFT01 (whose basis weights are 1 for k=0 and 2 otherwise)
    // realizes the orthonormal DCT-III.
    FftwBuffer in(n), out(n);
    const double s0w = std::sqrt(1.0 / w), sw = 1.0 / std::sqrt(2.0 * w);
    const double s0h = std::sqrt(1.0 / h), sh = 1.0 / std::sqrt(2.0 * h);
    for (int y = 0; y < h; ++y) {
        const double fy = (y == 0) ? s0h : sh;
        for (int x = 0; x < w; ++x) {
            const double fx = (x == 0) ? s0w : sw;
            in.p[static_cast<std::size_t>(y) * w + x] =
                plane.data[static_cast<std::size_t>(y) * w + x] * fx * fy;
        }
    }
    fftw_execute_r2r(PlanCache::instance().get(h, w, FFTW_REDFT01), in.p, out.p);

    Plane result(w, h);
    std::copy(out.p, out.p + n, result.data.begin());
    return result;
}

double plane_energy(const Plane& plane) {
    double sum = 0.0;
    for (double v : plane.data) sum += v * v;
    return sum;
}

} // namespace dsnfp
