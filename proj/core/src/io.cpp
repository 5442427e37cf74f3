#include "flaghp/io.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "flaghp/error.hpp"
#include "json.hpp"

namespace flaghp::io {
namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian hosts are not supported");

template <typename T>
void put_le(std::string& buf, T v) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(T));
  }
  buf.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(const char* p) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(T));
  }
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

}  // namespace

void append_u32(std::string& buf, std::uint32_t v) { put_le(buf, v); }
void append_f64(std::string& buf, double v) { put_le(buf, v); }

std::uint32_t read_u32_at(const std::string& buf, std::size_t offset) {
  if (offset + 4 > buf.size()) throw IoError("truncated binary data");
  return get_le<std::uint32_t>(buf.data() + offset);
}

double read_f64_at(const std::string& buf, std::size_t offset) {
  if (offset + 8 > buf.size()) throw IoError("truncated binary data");
  return get_le<double>(buf.data() + offset);
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".json");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_function(const std::filesystem::path& path, const SampledFunction& f) {
  const Grid& g = f.grid();
  std::string buf;
  buf.reserve(kHeaderBytes + f.size() * 16);
  buf.append("FLAG", 4);
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(g.n));
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(g.m));
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(g.L));
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(f.domain()));
  put_le<std::uint32_t>(buf, 1u);
  put_le<double>(buf, g.side);
  for (const auto& v : f.values()) {
    put_le<double>(buf, v.real());
    put_le<double>(buf, v.imag());
  }
  write_text(path, buf);

  nlohmann::ordered_json meta;
  meta["format"] = "flaghp-sampled-function";
  meta["version"] = 1;
  meta["n"] = g.n;
  meta["m"] = g.m;
  meta["L"] = g.L;
  meta["side"] = g.side;
  meta["tag"] = to_string(f.domain());
  meta["shape"] = f.shape();
  meta["count"] = f.size();
  meta["header_bytes"] = kHeaderBytes;
  meta["layout"] = "little-endian float64 (re, im) pairs, row-major";
  write_text(sidecar_path(path), meta.dump(2) + "\n");
}

SampledFunction read_function(const std::filesystem::path& path) {
  const std::string buf = read_text(path);
  if (buf.size() < kHeaderBytes || buf.compare(0, 4, "FLAG") != 0) {
    throw IoError("not a FLAG array: " + path.string());
  }
  const char* p = buf.data();
  const int n = static_cast<int>(get_le<std::uint32_t>(p + 4));
  const int m = static_cast<int>(get_le<std::uint32_t>(p + 8));
  const int L = static_cast<int>(get_le<std::uint32_t>(p + 12));
  const auto tag = get_le<std::uint32_t>(p + 16);
  const auto version = get_le<std::uint32_t>(p + 20);
  const double side = get_le<double>(p + 24);
  if (version != 1) throw IoError("unsupported FLAG version in " + path.string());
  if (tag > 1) throw IoError("bad domain tag in " + path.string());
  Grid grid;
  try {
    grid = make_grid(n, m, L, side);
  } catch (const ConfigError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  const Domain domain = static_cast<Domain>(tag);
  const int rank = grid.dims() + (domain == Domain::lifted ? m : 0);
  const std::size_t count = grid.count(rank);
  if (buf.size() != kHeaderBytes + count * 16) {
    throw IoError("truncated or oversized FLAG array: " + path.string());
  }
  std::vector<cplx> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    const char* q = p + kHeaderBytes + 16 * i;
    values[i] = cplx(get_le<double>(q), get_le<double>(q + 8));
  }
  try {
    return SampledFunction(grid, domain, std::move(values));
  } catch (const Error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace flaghp::io
