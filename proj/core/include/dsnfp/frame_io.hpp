#pragma once

#include <filesystem>

#include "dsnfp/frame.hpp"

namespace dsnfp {

/// Loads a binary PGM (P5) raster. bit_depth is inferred from maxval, which
/// must be 2^k - 1 for k in 8..16 (255 -> 8, 1023 -> 10, 65535 -> 16).
/// A sidecar `<path>.meta` file, when present, is parsed into Frame::meta.
Frame load_frame(const std::filesystem::path& path);

/// Writes a binary PGM (P5); 16-bit samples are big-endian per the format.
/// Non-empty metadata is written to `<path>.meta`.
void save_frame(const Frame& frame, const std::filesystem::path& path);

/// Sidecar metadata, line-oriented `key=value`. Unknown keys are ignored.
FrameMeta load_meta(const std::filesystem::path& path);
void save_meta(const FrameMeta& meta, const std::filesystem::path& path);

/// Reference-pattern container, little-endian throughout:
///   magic "DSNF" | u16 version=1 | u32 width | u32 height | u32 frame_count |
///   i32 temperature in centi-degrees C | width*height float32 row-major |
///   ceil(width*height/8) mask bytes, packed row-major LSB-first.
ReferencePattern load_pattern(const std::filesystem::path& path);
void save_pattern(const ReferencePattern& pattern, const std::filesystem::path& path);

/// Serializes a pattern to the DSNF byte layout (what save_pattern writes).
std::vector<std::uint8_t> pattern_to_bytes(const ReferencePattern& pattern);
ReferencePattern pattern_from_bytes(const std::uint8_t* bytes, std::size_t size);

} // namespace dsnfp
