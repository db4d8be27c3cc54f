#include "dsnfp/simulate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "dsnfp/error.hpp"
#include "dsnfp/thermal.hpp" // kBoltzmannEvPerK

namespace dsnfp {

namespace detail {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_key(std::uint64_t seed, std::uint64_t stream, std::uint64_t pixel) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s = a ^ (stream + 0x9e3779b97f4a7c15ULL);
    a = splitmix64(s);
    s = a ^ (pixel + 0xd1b54a32d192ed03ULL);
    return splitmix64(s);
}

// ln(k!) table; Stirling series beyond. All evaluation paths are fixed-order
// so identical inputs give identical samples everywhere.
constexpr int kLnFactTableSize = 2048;
const double* ln_fact_table() {
    static const std::vector<double> table = [] {
        std::vector<double> t(kLnFactTableSize);
        t[0] = 0.0;
        for (int k = 1; k < kLnFactTableSize; ++k) t[k] = t[k - 1] + std::log(double(k));
        return t;
    }();
    return table.data();
}

double ln_factorial(double k) {
    if (k < kLnFactTableSize) return ln_fact_table()[static_cast<int>(k)];
    const double x = k + 1.0;
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    return (x - 0.5) * std::log(x) - x + 0.9189385332046727 +
           inv * (1.0 / 12 - inv2 * (1.0 / 360 - inv2 / 1260));
}

} // namespace

PixelRng::PixelRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t pixel)
    : state_(mix_key(seed, stream, pixel)) {}

std::uint64_t PixelRng::next_u64() { return splitmix64(state_); }

double PixelRng::next_unit() {
    // 53-bit mantissa in (0,1): never returns 0, so logs are safe.
    const std::uint64_t bits = next_u64() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double PixelRng::next_gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.141592653589793 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

double PixelRng::poisson(double lambda) {
    if (lambda <= 0.0) return 0.0;
    if (lambda < 10.0) {
        // inversion by multiplication
        const double limit = std::exp(-lambda);
        double product = next_unit();
        double count = 0.0;
        while (product > limit) {
            product *= next_unit();
            count += 1.0;
        }
        return count;
    }
    if (lambda > 1000.0) {
        // documented Gaussian cut-over for large means
        const double v = std::floor(lambda + std::sqrt(lambda) * next_gaussian() + 0.5);
        return std::max(0.0, v);
    }
    // Hormann's PTRS transformed rejection, exact for the mid range.
    const double slam = std::sqrt(lambda);
    const double loglam = std::log(lambda);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = next_unit() - 0.5;
        const double v = next_unit();
        const double us = 0.5 - std::abs(u);
        const double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
        if (us >= 0.07 && v <= v_r) return k;
        if (k < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            k * loglam - lambda - ln_factorial(k)) {
            return k;
        }
    }
}

} // namespace detail

namespace {

constexpr std::uint64_t kDarkMapStream = 0xd42f0a01;
constexpr std::uint64_t kPrnuMapStream = 0xd42f0a02;
constexpr std::uint64_t kHotPixelStream = 0xd42f0a03;
constexpr std::uint64_t kFrameStreamBase = 0x100;

std::vector<std::uint32_t> derive_hot_pixels(std::uint64_t seed, double fraction,
                                             std::size_t pixel_count) {
    const auto target = static_cast<std::size_t>(fraction * static_cast<double>(pixel_count));
    std::set<std::uint32_t> chosen;
    detail::PixelRng rng(seed, kHotPixelStream, 0);
    while (chosen.size() < target) {
        chosen.insert(static_cast<std::uint32_t>(rng.next_u64() % pixel_count));
    }
    return {chosen.begin(), chosen.end()};
}

double dark_rate_factor(double delta_e_ev, double temperature_c) {
    const double t_k = temperature_c + 273.15;
    return t_k * t_k * std::exp(-delta_e_ev / (kBoltzmannEvPerK * t_k));
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_f32_map(const std::filesystem::path& path, const std::vector<float>& map) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(map.size() * 4);
    for (float f : map) {
        const auto u = std::bit_cast<std::uint32_t>(f);
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>((u >> (8 * i)) & 0xff));
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(errc::io_error, "cannot create " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

std::vector<float> read_f32_map(const std::filesystem::path& path, std::size_t expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(errc::io_error, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (bytes.size() != expected * 4)
        raise(errc::truncated_data, path.string() + ": map size does not match profile");
    std::vector<float> map(expected);
    for (std::size_t i = 0; i < expected; ++i) {
        std::uint32_t u = 0;
        for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(bytes[4 * i + b]) << (8 * b);
        map[i] = std::bit_cast<float>(u);
    }
    return map;
}

Frame render(const SensorProfile& p, double temperature_c, double exposure_s,
             double illuminance, std::uint64_t frame_index) {
    if (!(exposure_s > 0.0)) raise(errc::invalid_param, "exposure must be positive");
    if (temperature_c < -50.0 || temperature_c > 120.0)
        raise(errc::invalid_param, "temperature outside the supported -50..120 C range");
    if (illuminance < 0.0) raise(errc::invalid_param, "illuminance must be >= 0");
    if (p.dark_rate.size() != p.pixel_count() || p.prnu.size() != p.pixel_count())
        raise(errc::invalid_param, "profile maps do not match dimensions");

    const double dark_scale = p.j0 * dark_rate_factor(p.delta_e_ev, temperature_c) * exposure_s;
    const double photo_scale = illuminance * exposure_s;
    const double maxval = p.max_value();
    const double dn_scale = maxval / p.n_max;

    Frame frame;
    frame.width = p.width;
    frame.height = p.height;
    frame.bit_depth = p.bit_depth;
    frame.data.resize(p.pixel_count());
    frame.meta.temperature_c = temperature_c;
    frame.meta.exposure_s = exposure_s;

    const std::size_t n = p.pixel_count();
    for (std::size_t i = 0; i < n; ++i) {
        detail::PixelRng rng(p.seed, kFrameStreamBase + frame_index, i);
        // Photo and dark generation are independent Poissons; their sum is
        // Poisson of the summed mean, which keeps the zero-illuminance flat
        // bit-identical to the dark frame on the same stream.
        const double mean_e = p.dark_rate[i] * dark_scale + p.prnu[i] * photo_scale;
        double electrons = rng.poisson(mean_e);
        if (p.read_noise_e > 0.0) electrons += p.read_noise_e * rng.next_gaussian();
        electrons = std::clamp(electrons, 0.0, p.n_max);
        const double dn = std::clamp(std::round(electrons * dn_scale), 0.0, maxval);
        frame.data[i] = static_cast<std::uint16_t>(dn);
    }
    for (std::uint32_t hot : p.hot_pixels) {
        frame.data[hot] = static_cast<std::uint16_t>(maxval);
    }
    return frame;
}

} // namespace

double j0_for_dark_electrons(double electrons, double delta_e_ev, double t_c, double exposure_s) {
    if (!(electrons >= 0.0)) raise(errc::invalid_param, "electrons must be >= 0");
    if (!(exposure_s > 0.0)) raise(errc::invalid_param, "exposure must be positive");
    return electrons / (dark_rate_factor(delta_e_ev, t_c) * exposure_s);
}

double dark_mean_electrons(const SensorProfile& profile, double temperature_c,
                           double exposure_s) {
    if (!(exposure_s > 0.0)) raise(errc::invalid_param, "exposure must be positive");
    return profile.j0 * dark_rate_factor(profile.delta_e_ev, temperature_c) * exposure_s;
}

SensorProfile make_profile(const ProfileParams& params) {
    if (params.width < 1 || params.height < 1)
        raise(errc::invalid_param, "profile dimensions must be >= 1");
    if (params.bit_depth < 8 || params.bit_depth > 16)
        raise(errc::invalid_param, "bit depth must be in 8..16");
    if (!(params.n_max > 0.0)) raise(errc::invalid_param, "well capacity must be positive");
    if (params.hot_pixel_fraction < 0.0 || params.hot_pixel_fraction > 0.05)
        raise(errc::invalid_param, "hot pixel fraction must be in [0, 0.05]");
    if (params.read_noise_e < 0.0) raise(errc::invalid_param, "read noise must be >= 0");
    if (!(params.dark_sigma_ln >= 0.0) || !(params.prnu_sigma >= 0.0))
        raise(errc::invalid_param, "map sigmas must be >= 0");

    SensorProfile p;
    p.width = params.width;
    p.height = params.height;
    p.bit_depth = params.bit_depth;
    p.n_max = params.n_max;
    p.delta_e_ev = params.delta_e_ev;
    p.hot_pixel_fraction = params.hot_pixel_fraction;
    p.read_noise_e = params.read_noise_e;
    p.seed = params.seed;
    p.j0 = params.j0 > 0.0
               ? params.j0
               : j0_for_dark_electrons(params.dark_e_at_30c, params.delta_e_ev, 30.0);

    const std::size_t n = p.pixel_count();
    p.dark_rate.resize(n);
    p.prnu.resize(n);
    // lognormal dark rates, median 1; lognormal PRNU gains, mean exactly 1
    const double prnu_mu = -params.prnu_sigma * params.prnu_sigma / 2.0;
    for (std::size_t i = 0; i < n; ++i) {
        detail::PixelRng dark_rng(p.seed, kDarkMapStream, i);
        detail::PixelRng prnu_rng(p.seed, kPrnuMapStream, i);
        p.dark_rate[i] = static_cast<float>(std::exp(params.dark_sigma_ln * dark_rng.next_gaussian()));
        p.prnu[i] = static_cast<float>(std::exp(prnu_mu + params.prnu_sigma * prnu_rng.next_gaussian()));
    }
    p.hot_pixels = derive_hot_pixels(p.seed, p.hot_pixel_fraction, n);
    return p;
}

Frame capture_dark(const SensorProfile& profile, double temperature_c, double exposure_s,
                   std::uint64_t frame_index) {
    return render(profile, temperature_c, exposure_s, 0.0, frame_index);
}

Frame capture_flat(const SensorProfile& profile, double temperature_c, double exposure_s,
                   double illuminance, std::uint64_t frame_index) {
    return render(profile, temperature_c, exposure_s, illuminance, frame_index);
}

void save_profile(const SensorProfile& profile, const std::filesystem::path& base) {
    const std::string dark_name = base.filename().string() + ".dark.f32";
    const std::string prnu_name = base.filename().string() + ".prnu.f32";

    std::ostringstream text;
    text << "width=" << profile.width << "\n";
    text << "height=" << profile.height << "\n";
    text << "bit_depth=" << profile.bit_depth << "\n";
    text << "n_max=" << format_double(profile.n_max) << "\n";
    text << "j0=" << format_double(profile.j0) << "\n";
    text << "delta_e_ev=" << format_double(profile.delta_e_ev) << "\n";
    text << "hot_pixel_fraction=" << format_double(profile.hot_pixel_fraction) << "\n";
    text << "read_noise_e=" << format_double(profile.read_noise_e) << "\n";
    text << "seed=" << profile.seed << "\n";
    text << "dark_rate_map=" << dark_name << "\n";
    text << "prnu_map=" << prnu_name << "\n";

    std::ofstream out(base, std::ios::trunc);
    if (!out) raise(errc::io_error, "cannot create " + base.string());
    out << text.str();
    out.close();

    const auto dir = base.parent_path();
    write_f32_map(dir / dark_name, profile.dark_rate);
    write_f32_map(dir / prnu_name, profile.prnu);
}

SensorProfile load_profile(const std::filesystem::path& base) {
    std::ifstream in(base);
    if (!in) raise(errc::io_error, "cannot open " + base.string());

    SensorProfile p;
    std::string dark_name, prnu_name;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "width") p.width = std::atoi(value.c_str());
        else if (key == "height") p.height = std::atoi(value.c_str());
        else if (key == "bit_depth") p.bit_depth = std::atoi(value.c_str());
        else if (key == "n_max") p.n_max = std::strtod(value.c_str(), nullptr);
        else if (key == "j0") p.j0 = std::strtod(value.c_str(), nullptr);
        else if (key == "delta_e_ev") p.delta_e_ev = std::strtod(value.c_str(), nullptr);
        else if (key == "hot_pixel_fraction") p.hot_pixel_fraction = std::strtod(value.c_str(), nullptr);
        else if (key == "read_noise_e") p.read_noise_e = std::strtod(value.c_str(), nullptr);
        else if (key == "seed") p.seed = std::strtoull(value.c_str(), nullptr, 10);
        else if (key == "dark_rate_map") dark_name = value;
        else if (key == "prnu_map") prnu_name = value;
    }
    if (p.width < 1 || p.height < 1 || dark_name.empty() || prnu_name.empty())
        raise(errc::malformed_header, base.string() + ": incomplete profile");

    const auto dir = base.parent_path();
    p.dark_rate = read_f32_map(dir / dark_name, p.pixel_count());
    p.prnu = read_f32_map(dir / prnu_name, p.pixel_count());
    p.hot_pixels = derive_hot_pixels(p.seed, p.hot_pixel_fraction, p.pixel_count());
    return p;
}

} // namespace dsnfp
