#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "misme/error.hpp"
#include "misme/tensor.hpp"

namespace misme::nn {

// Flat binary checkpoint:
//   magic "MISME1", one version byte,
//   then per parameter: u32 name length, name bytes, u32 rank,
//   u64 dims..., little-endian f64 values.
// Buffers (running statistics) are stored alongside trainable weights.

namespace detail {

inline constexpr char kCheckpointMagic[6] = {'M', 'I', 'S', 'M', 'E', '1'};
inline constexpr std::uint8_t kCheckpointVersion = 1;

template <typename T>
void write_le(std::ostream& out, T v) {
  static_assert(std::is_integral_v<T>);
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  in.read(reinterpret_cast<char*>(buf), sizeof(T));
  if (!in) throw ParseError("checkpoint: truncated file");
  T v = 0;
  for (std::size_t i = sizeof(T); i-- > 0;) v = static_cast<T>((v << 8) | buf[i]);
  return v;
}

inline void write_f64(std::ostream& out, double d) {
  write_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(d));
}

inline double read_f64(std::istream& in) {
  return std::bit_cast<double>(read_le<std::uint64_t>(in));
}

}  // namespace detail

inline void save_checkpoint(const std::filesystem::path& path,
                            std::span<Parameter* const> params) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint: " + path.string());
  out.write(detail::kCheckpointMagic, sizeof(detail::kCheckpointMagic));
  out.put(static_cast<char>(detail::kCheckpointVersion));
  for (const Parameter* p : params) {
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(p->value.rank()));
    for (std::size_t d : p->value.shape()) detail::write_le<std::uint64_t>(out, d);
    for (double v : p->value.values()) detail::write_f64(out, v);
  }
  if (!out) throw IoError("checkpoint write failed: " + path.string());
}

// Loads by name into the given parameters. Every parameter must be present in
// the file with a matching shape; unknown names in the file are an error.
inline void load_checkpoint(const std::filesystem::path& path, std::span<Parameter* const> params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  char magic[6];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, detail::kCheckpointMagic, sizeof(magic)) != 0) {
    throw ParseError("checkpoint: bad magic in " + path.string());
  }
  const int version = in.get();
  if (version != detail::kCheckpointVersion) {
    throw ParseError("checkpoint: unsupported version " + std::to_string(version));
  }

  std::map<std::string, Parameter*> by_name;
  for (Parameter* p : params) by_name[p->name] = p;

  std::size_t loaded = 0;
  while (true) {
    in.peek();
    if (in.eof()) break;
    const auto name_len = detail::read_le<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw ParseError("checkpoint: truncated name");
    const auto rank = detail::read_le<std::uint32_t>(in);
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(detail::read_le<std::uint64_t>(in));
    std::size_t n = shape.empty() ? 0 : 1;
    for (std::size_t d : shape) n *= d;
    std::vector<double> values(n);
    for (auto& v : values) v = detail::read_f64(in);

    auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw SchemaError("checkpoint: unknown parameter '" + name + "' in " + path.string());
    }
    Parameter& p = *it->second;
    if (p.value.shape() != shape) {
      throw DimensionError("checkpoint: parameter '" + name + "' has shape " +
                           shape_to_string(shape) + ", model expects " +
                           shape_to_string(p.value.shape()));
    }
    p.value = Tensor(shape, std::move(values));
    ++loaded;
  }
  if (loaded != by_name.size()) {
    throw SchemaError("checkpoint: file holds " + std::to_string(loaded) +
                      " parameters, model expects " + std::to_string(by_name.size()));
  }
}

}  // namespace misme::nn
