#include "dsnfp/frame_io.hpp"

#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "dsnfp/error.hpp"

namespace dsnfp {

namespace {

constexpr char kMagic[4] = {'D', 'S', 'N', 'F'};
constexpr std::uint16_t kVersion = 1;

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(errc::io_error, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

void write_all(const std::filesystem::path& path, const void* data, std::size_t size) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(errc::io_error, "cannot create " + path.string());
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) raise(errc::io_error, "short write to " + path.string());
}

// Little-endian scalar packing, independent of host byte order.
void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}
void put_i32(std::vector<std::uint8_t>& out, std::int32_t v) {
    put_u32(out, static_cast<std::uint32_t>(v));
}
void put_f32(std::vector<std::uint8_t>& out, float v) {
    put_u32(out, std::bit_cast<std::uint32_t>(v));
}
std::uint16_t get_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
float get_f32(const std::uint8_t* p) { return std::bit_cast<float>(get_u32(p)); }

// PGM header token reader: skips whitespace and '#' comment lines.
struct TokenReader {
    const std::uint8_t* p;
    const std::uint8_t* end;

    bool next(std::string& token) {
        while (p < end) {
            if (std::isspace(*p)) {
                ++p;
            } else if (*p == '#') {
                while (p < end && *p != '\n') ++p;
            } else {
                break;
            }
        }
        token.clear();
        while (p < end && !std::isspace(*p)) token.push_back(static_cast<char>(*p++));
        return !token.empty();
    }
};

long parse_long(const std::string& s, const char* what) {
    long value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size())
        raise(errc::malformed_header, std::string("bad ") + what + " token '" + s + "'");
    return value;
}

int bit_depth_from_maxval(long maxval) {
    for (int bits = 8; bits <= 16; ++bits) {
        if (maxval == (1L << bits) - 1) return bits;
    }
    raise(errc::unsupported_maxval,
          "maxval " + std::to_string(maxval) + " is not 2^k-1 for k in 8..16");
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

Frame load_frame(const std::filesystem::path& path) {
    const auto bytes = read_all(path);
    TokenReader reader{bytes.data(), bytes.data() + bytes.size()};

    std::string tok;
    if (!reader.next(tok) || tok != "P5")
        raise(errc::malformed_header, path.string() + ": not a binary PGM (P5)");

    std::string wtok, htok, mtok;
    if (!reader.next(wtok) || !reader.next(htok) || !reader.next(mtok))
        raise(errc::malformed_header, path.string() + ": incomplete PGM header");

    const long width = parse_long(wtok, "width");
    const long height = parse_long(htok, "height");
    const long maxval = parse_long(mtok, "maxval");
    if (width <= 0 || height <= 0)
        raise(errc::malformed_header, path.string() + ": non-positive dimensions");

    Frame frame;
    frame.width = static_cast<int>(width);
    frame.height = static_cast<int>(height);
    frame.bit_depth = bit_depth_from_maxval(maxval);

    // Exactly one whitespace byte separates the header from the samples.
    if (reader.p >= reader.end || !std::isspace(*reader.p))
        raise(errc::malformed_header, path.string() + ": missing header terminator");
    ++reader.p;

    const std::size_t n = frame.pixel_count();
    const int bytes_per_sample = maxval > 255 ? 2 : 1;
    const std::size_t need = n * bytes_per_sample;
    const std::size_t have = static_cast<std::size_t>(reader.end - reader.p);
    if (have < need)
        raise(errc::truncated_data, path.string() + ": expected " + std::to_string(need) +
                                        " sample bytes, found " + std::to_string(have));

    frame.data.resize(n);
    const std::uint8_t* src = reader.p;
    if (bytes_per_sample == 2) {
        for (std::size_t i = 0; i < n; ++i) {
            // PGM stores 16-bit samples big-endian.
            frame.data[i] = static_cast<std::uint16_t>((src[2 * i] << 8) | src[2 * i + 1]);
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) frame.data[i] = src[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (frame.data[i] > maxval)
            raise(errc::truncated_data,
                  path.string() + ": sample exceeds declared maxval " + std::to_string(maxval));
    }

    const auto meta_path = std::filesystem::path(path.string() + ".meta");
    if (std::filesystem::exists(meta_path)) frame.meta = load_meta(meta_path);
    return frame;
}

void save_frame(const Frame& frame, const std::filesystem::path& path) {
    if (frame.width <= 0 || frame.height <= 0)
        raise(errc::invalid_param, "frame has non-positive dimensions");
    if (frame.bit_depth < 8 || frame.bit_depth > 16)
        raise(errc::invalid_param, "bit depth must be in 8..16");
    if (frame.data.size() != frame.pixel_count())
        raise(errc::invalid_param, "frame data length does not match dimensions");

    const int maxval = frame.max_value();
    for (std::uint16_t s : frame.data) {
        if (s > maxval) raise(errc::invalid_param, "sample exceeds bit depth full scale");
    }

    std::string header = "P5\n" + std::to_string(frame.width) + " " +
                         std::to_string(frame.height) + "\n" + std::to_string(maxval) + "\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    if (maxval > 255) {
        out.reserve(out.size() + frame.data.size() * 2);
        for (std::uint16_t s : frame.data) {
            out.push_back(static_cast<std::uint8_t>(s >> 8));
            out.push_back(static_cast<std::uint8_t>(s & 0xff));
        }
    } else {
        for (std::uint16_t s : frame.data) out.push_back(static_cast<std::uint8_t>(s));
    }
    write_all(path, out.data(), out.size());

    if (!frame.meta.empty()) save_meta(frame.meta, std::filesystem::path(path.string() + ".meta"));
}

FrameMeta load_meta(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(errc::io_error, "cannot open " + path.string());
    FrameMeta meta;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "temperature_c") {
            meta.temperature_c = std::strtod(value.c_str(), nullptr);
        } else if (key == "exposure_s") {
            meta.exposure_s = std::strtod(value.c_str(), nullptr);
        } else if (key == "camera_id") {
            meta.camera_id = value;
        } else if (key == "lens_id") {
            meta.lens_id = value;
        } // unknown keys ignored
    }
    return meta;
}

void save_meta(const FrameMeta& meta, const std::filesystem::path& path) {
    std::ostringstream out;
    if (meta.temperature_c) out << "temperature_c=" << format_double(*meta.temperature_c) << "\n";
    if (meta.exposure_s) out << "exposure_s=" << format_double(*meta.exposure_s) << "\n";
    if (!meta.camera_id.empty()) out << "camera_id=" << meta.camera_id << "\n";
    if (!meta.lens_id.empty()) out << "lens_id=" << meta.lens_id << "\n";
    const std::string s = out.str();
    write_all(path, s.data(), s.size());
}

std::vector<std::uint8_t> pattern_to_bytes(const ReferencePattern& p) {
    const std::size_t n = p.pixel_count();
    if (p.width <= 0 || p.height <= 0)
        raise(errc::invalid_param, "pattern has non-positive dimensions");
    if (p.data.size() != n || p.mask.size() != n)
        raise(errc::invalid_param, "pattern data/mask length does not match dimensions");
    if (p.frame_count < 1) raise(errc::invalid_param, "frame_count must be >= 1");
    for (std::size_t i = 0; i < n; ++i) {
        if (p.mask[i] && p.data[i] != 0.0f)
            raise(errc::invalid_param, "masked position carries nonzero data");
    }

    std::vector<std::uint8_t> out;
    out.reserve(22 + 4 * n + (n + 7) / 8);
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u16(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(p.width));
    put_u32(out, static_cast<std::uint32_t>(p.height));
    put_u32(out, p.frame_count);
    put_i32(out, static_cast<std::int32_t>(std::llround(p.temperature_c * 100.0)));
    for (std::size_t i = 0; i < n; ++i) put_f32(out, p.data[i]);
    for (std::size_t base = 0; base < n; base += 8) {
        std::uint8_t byte = 0;
        for (std::size_t bit = 0; bit < 8 && base + bit < n; ++bit) {
            if (p.mask[base + bit]) byte |= static_cast<std::uint8_t>(1u << bit);
        }
        out.push_back(byte);
    }
    return out;
}

ReferencePattern pattern_from_bytes(const std::uint8_t* bytes, std::size_t size) {
    if (size < 22) raise(errc::truncated_data, "pattern shorter than header");
    if (std::memcmp(bytes, kMagic, 4) != 0) raise(errc::bad_magic, "magic is not DSNF");
    const std::uint16_t version = get_u16(bytes + 4);
    if (version != kVersion)
        raise(errc::version_mismatch, "unsupported version " + std::to_string(version));

    ReferencePattern p;
    const std::uint32_t w = get_u32(bytes + 6);
    const std::uint32_t h = get_u32(bytes + 10);
    if (w == 0 || h == 0) raise(errc::malformed_header, "zero pattern dimensions");
    p.width = static_cast<int>(w);
    p.height = static_cast<int>(h);
    p.frame_count = get_u32(bytes + 14);
    p.temperature_c = static_cast<std::int32_t>(get_u32(bytes + 18)) / 100.0;

    const std::size_t n = p.pixel_count();
    const std::size_t mask_bytes = (n + 7) / 8;
    if (size < 22 + 4 * n + mask_bytes)
        raise(errc::truncated_data, "pattern payload shorter than declared dimensions");

    p.data.resize(n);
    for (std::size_t i = 0; i < n; ++i) p.data[i] = get_f32(bytes + 22 + 4 * i);
    p.mask.assign(n, 0);
    const std::uint8_t* mask = bytes + 22 + 4 * n;
    for (std::size_t i = 0; i < n; ++i) {
        p.mask[i] = (mask[i / 8] >> (i % 8)) & 1u;
    }
    return p;
}

ReferencePattern load_pattern(const std::filesystem::path& path) {
    const auto bytes = read_all(path);
    try {
        return pattern_from_bytes(bytes.data(), bytes.size());
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

void save_pattern(const ReferencePattern& pattern, const std::filesystem::path& path) {
    const auto bytes = pattern_to_bytes(pattern);
    write_all(path, bytes.data(), bytes.size());
}

} // namespace dsnfp
