#pragma once

// Raw tensor container. Layout, all little-endian:
//   bytes 0..3   magic "UTSR"
//   bytes 4..7   rank as u32
//   then rank extents as u32 each
//   then the samples as 32-bit floats, row-major
// Roundtrips are bitwise exact.

#include <cstdio>
#include <cstring>
#include <memory>

#include "uhrseg/core.hpp"

namespace uhrseg {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void put_u32le(unsigned char* p, std::uint32_t v) {
  p[0] = static_cast<unsigned char>(v);
  p[1] = static_cast<unsigned char>(v >> 8);
  p[2] = static_cast<unsigned char>(v >> 16);
  p[3] = static_cast<unsigned char>(v >> 24);
}

inline std::uint32_t get_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

struct FileCloser {
  void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace detail

inline void write_raw_tensor(const Tensor& t, const std::string& path) {
  if (t.dims.empty()) throw std::invalid_argument("write_raw_tensor: rank >= 1 required");
  detail::FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw IoError("cannot open for write: " + path);

  std::vector<unsigned char> header(8 + 4 * t.dims.size());
  std::memcpy(header.data(), "UTSR", 4);
  detail::put_u32le(header.data() + 4, static_cast<std::uint32_t>(t.dims.size()));
  for (std::size_t i = 0; i < t.dims.size(); ++i)
    detail::put_u32le(header.data() + 8 + 4 * i, t.dims[i]);
  if (std::fwrite(header.data(), 1, header.size(), f.get()) != header.size())
    throw IoError("short write: " + path);

  std::vector<unsigned char> buf(t.data.size() * 4);
  for (std::size_t i = 0; i < t.data.size(); ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, &t.data[i], 4);
    detail::put_u32le(buf.data() + 4 * i, bits);
  }
  if (std::fwrite(buf.data(), 1, buf.size(), f.get()) != buf.size())
    throw IoError("short write: " + path);
}

inline Tensor read_raw_tensor(const std::string& path) {
  detail::FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw IoError("cannot open: " + path);

  unsigned char head[8];
  if (std::fread(head, 1, 8, f.get()) != 8) throw IoError("short read (header): " + path);
  if (std::memcmp(head, "UTSR", 4) != 0) throw IoError("bad magic, not a UTSR tensor: " + path);
  std::uint32_t rank = detail::get_u32le(head + 4);
  if (rank == 0) throw IoError("rank >= 1 required: " + path);
  if (rank > 255) throw IoError("implausible rank " + std::to_string(rank) + ": " + path);

  std::vector<std::uint32_t> dims(rank);
  std::vector<unsigned char> extents(4 * rank);
  if (std::fread(extents.data(), 1, extents.size(), f.get()) != extents.size())
    throw IoError("short read (extents): " + path);
  std::size_t count = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    dims[i] = detail::get_u32le(extents.data() + 4 * i);
    if (dims[i] == 0) throw IoError("zero extent: " + path);
    if (count > SIZE_MAX / 4 / dims[i]) throw IoError("extent overflow: " + path);
    count *= dims[i];
  }

  std::vector<unsigned char> buf(count * 4);
  if (std::fread(buf.data(), 1, buf.size(), f.get()) != buf.size())
    throw IoError("short read (data): " + path);

  Tensor t(dims);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits = detail::get_u32le(buf.data() + 4 * i);
    std::memcpy(&t.data[i], &bits, 4);
  }
  return t;
}

}  // namespace uhrseg
