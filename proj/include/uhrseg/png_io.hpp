#pragma once

// PNG decode/encode backed by libpng. Images are 8-bit grayscale or RGB
// (palette and alpha variants are normalized on read); sample v maps to
// v/255. Label maps are stored as plain 8-bit grayscale with 255 as the
// ignore value.

#include <csetjmp>
#include <cmath>
#include <cstdio>

#include <png.h>

#include "uhrseg/core.hpp"
#include "uhrseg/tensor_io.hpp"

namespace uhrseg {

namespace detail {

struct PngReadGuard {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReadGuard() { if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr); }
};

struct PngWriteGuard {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriteGuard() { if (png) png_destroy_write_struct(&png, info ? &info : nullptr); }
};

struct RawImage {
  int height = 0;
  int width = 0;
  int channels = 0;                 // 1 or 3
  std::vector<std::uint8_t> bytes;  // row-major, interleaved
};

inline RawImage read_png_bytes(const std::string& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw IoError("cannot open: " + path);

  unsigned char sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw IoError("not a PNG file: " + path);

  PngReadGuard g;
  g.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!g.png) throw IoError("libpng init failed");
  g.info = png_create_info_struct(g.png);
  if (!g.info) throw IoError("libpng init failed");

  if (setjmp(png_jmpbuf(g.png))) throw IoError("PNG decode error: " + path);

  png_init_io(g.png, file.get());
  png_set_sig_bytes(g.png, 8);
  png_read_info(g.png, g.info);

  const png_uint_32 w = png_get_image_width(g.png, g.info);
  const png_uint_32 h = png_get_image_height(g.png, g.info);
  const int depth = png_get_bit_depth(g.png, g.info);
  const int color = png_get_color_type(g.png, g.info);

  if (depth == 16)
    throw IoError("unsupported bit depth 16 (8-bit PNG required): " + path);
  if (w == 0 || h == 0 || w > (1u << 24) || h > (1u << 24))
    throw IoError("implausible PNG dimensions: " + path);

  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(g.png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(g.png);
  if (png_get_valid(g.png, g.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(g.png);
  if (color & PNG_COLOR_MASK_ALPHA || png_get_valid(g.png, g.info, PNG_INFO_tRNS))
    png_set_strip_alpha(g.png);
  png_set_interlace_handling(g.png);
  png_read_update_info(g.png, g.info);

  const int channels = png_get_channels(g.png, g.info);
  if (channels != 1 && channels != 3)
    throw IoError("unsupported channel count " + std::to_string(channels) + ": " + path);

  RawImage img;
  img.height = static_cast<int>(h);
  img.width = static_cast<int>(w);
  img.channels = channels;
  img.bytes.resize(static_cast<std::size_t>(h) * w * channels);

  std::vector<png_bytep> rows(h);
  const std::size_t rowbytes = static_cast<std::size_t>(w) * channels;
  if (png_get_rowbytes(g.png, g.info) != rowbytes)
    throw IoError("unexpected PNG row layout: " + path);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = img.bytes.data() + y * rowbytes;
  png_read_image(g.png, rows.data());
  png_read_end(g.png, nullptr);
  return img;
}

inline void write_png_bytes(const std::string& path, int height, int width, int channels,
                            const std::uint8_t* bytes) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw IoError("cannot open for write: " + path);

  PngWriteGuard g;
  g.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!g.png) throw IoError("libpng init failed");
  g.info = png_create_info_struct(g.png);
  if (!g.info) throw IoError("libpng init failed");

  if (setjmp(png_jmpbuf(g.png))) throw IoError("PNG encode error: " + path);

  png_init_io(g.png, file.get());
  png_set_IHDR(g.png, g.info, width, height, 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(g.png, g.info);

  const std::size_t rowbytes = static_cast<std::size_t>(width) * channels;
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y)
    rows[y] = const_cast<png_bytep>(bytes + y * rowbytes);
  png_write_image(g.png, rows.data());
  png_write_end(g.png, nullptr);
}

inline std::uint8_t to_byte(float v) {
  float scaled = v * 255.0f;
  if (!(scaled > 0.0f)) return 0;  // also catches NaN
  if (scaled >= 255.0f) return 255;
  return static_cast<std::uint8_t>(std::lround(scaled));
}

}  // namespace detail

/// Reads an 8-bit grayscale or RGB PNG as 1 or 3 planes scaled to [0,1].
inline std::vector<Plane> read_image_png(const std::string& path) {
  detail::RawImage img = detail::read_png_bytes(path);
  std::vector<Plane> planes;
  for (int c = 0; c < img.channels; ++c) {
    Plane p(img.height, img.width);
    for (std::size_t i = 0; i < p.size(); ++i)
      p.data[i] = static_cast<float>(img.bytes[i * img.channels + c]) / 255.0f;
    planes.push_back(std::move(p));
  }
  return planes;
}

/// Writes 1 (grayscale) or 3 (RGB) planes as an 8-bit PNG; samples are
/// clamped to [0,1] and quantized to v*255.
inline void write_image_png(const std::vector<Plane>& planes, const std::string& path) {
  if (planes.size() != 1 && planes.size() != 3)
    throw std::invalid_argument("write_image_png: 1 or 3 planes required");
  const int h = planes[0].height, w = planes[0].width;
  for (const Plane& p : planes)
    if (p.height != h || p.width != w)
      throw std::invalid_argument("write_image_png: plane shapes differ");
  const int ch = static_cast<int>(planes.size());
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(h) * w * ch);
  for (int c = 0; c < ch; ++c)
    for (std::size_t i = 0; i < planes[c].size(); ++i)
      bytes[i * ch + c] = detail::to_byte(planes[c].data[i]);
  detail::write_png_bytes(path, h, w, ch, bytes.data());
}

/// Reads a label map from a strict 8-bit grayscale PNG (ids as raw bytes).
inline LabelMap read_label_png(const std::string& path) {
  detail::RawImage img = detail::read_png_bytes(path);
  if (img.channels != 1)
    throw IoError("label maps must be 8-bit grayscale PNG: " + path);
  LabelMap m(img.height, img.width);
  m.labels = std::move(img.bytes);
  return m;
}

inline void write_label_png(const LabelMap& m, const std::string& path) {
  detail::write_png_bytes(path, m.height, m.width, 1, m.labels.data());
}

}  // namespace uhrseg
