#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "flaghp/sampled_function.hpp"

namespace flaghp::io {

/// Binary layout (all little-endian):
///   bytes  0..3   magic "FLAG"
///   bytes  4..7   uint32 n
///   bytes  8..11  uint32 m
///   bytes 12..15  uint32 L
///   bytes 16..19  uint32 tag (0 = base, 1 = lifted)
///   bytes 20..23  uint32 format version (1)
///   bytes 24..31  float64 side
///   then size() pairs of float64 (re, im), row-major.
/// A sidecar `<path>.json` descriptor repeats the metadata with the shape.
inline constexpr std::size_t kHeaderBytes = 32;

void write_function(const std::filesystem::path& path, const SampledFunction& f);
SampledFunction read_function(const std::filesystem::path& path);

/// Sidecar path for a binary array.
std::filesystem::path sidecar_path(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Little-endian scalar encoding helpers shared by the other binary formats.
void append_u32(std::string& buf, std::uint32_t v);
void append_f64(std::string& buf, double v);
/// Throw IoError when `offset` runs past the buffer.
std::uint32_t read_u32_at(const std::string& buf, std::size_t offset);
double read_f64_at(const std::string& buf, std::size_t offset);

}  // namespace flaghp::io
