#pragma once

// Core value types shared by every module: 2D sample planes, dense
// row-major tensors, label maps and the deterministic RNG.

#include <cstdint>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace uhrseg {

/// One image or feature channel: row-major grid of real samples.
template <typename T>
struct BasicPlane {
  int height = 0;
  int width = 0;
  std::vector<T> data;  // data[y * width + x]

  BasicPlane() = default;

  BasicPlane(int h, int w, T fill = T(0)) : height(h), width(w) {
    if (h < 1 || w < 1)
      throw std::invalid_argument("plane dimensions must be >= 1, got " +
                                  std::to_string(h) + "x" + std::to_string(w));
    data.assign(static_cast<std::size_t>(h) * w, fill);
  }

  BasicPlane(int h, int w, std::vector<T> samples) : height(h), width(w), data(std::move(samples)) {
    if (h < 1 || w < 1)
      throw std::invalid_argument("plane dimensions must be >= 1, got " +
                                  std::to_string(h) + "x" + std::to_string(w));
    if (data.size() != static_cast<std::size_t>(h) * w)
      throw std::invalid_argument("plane data length " + std::to_string(data.size()) +
                                  " does not match " + std::to_string(h) + "x" + std::to_string(w));
  }

  T& at(int y, int x) { return data[static_cast<std::size_t>(y) * width + x]; }
  const T& at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }

  std::size_t size() const { return data.size(); }

  bool same_shape(const BasicPlane& o) const { return height == o.height && width == o.width; }

  template <typename U>
  BasicPlane<U> cast() const {
    BasicPlane<U> out(height, width);
    for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
    return out;
  }
};

using Plane = BasicPlane<float>;
using PlaneD = BasicPlane<double>;

/// Dense row-major tensor of arbitrary rank. Rank-3 tensors are
/// interpreted as (channels, height, width) throughout the toolkit.
template <typename T>
struct BasicTensor {
  std::vector<std::uint32_t> dims;
  std::vector<T> data;

  BasicTensor() = default;

  explicit BasicTensor(std::vector<std::uint32_t> extents, T fill = T(0)) : dims(std::move(extents)) {
    data.assign(checked_count(dims), fill);
  }

  BasicTensor(std::vector<std::uint32_t> extents, std::vector<T> samples)
      : dims(std::move(extents)), data(std::move(samples)) {
    if (data.size() != checked_count(dims))
      throw std::invalid_argument("tensor data length " + std::to_string(data.size()) +
                                  " does not match product of dims");
  }

  static std::size_t checked_count(const std::vector<std::uint32_t>& extents) {
    if (extents.empty()) throw std::invalid_argument("tensor rank must be >= 1");
    std::size_t n = 1;
    for (std::uint32_t e : extents) {
      if (e == 0) throw std::invalid_argument("tensor extents must be >= 1");
      if (n > SIZE_MAX / e) throw std::invalid_argument("tensor extent overflow");
      n *= e;
    }
    return n;
  }

  int rank() const { return static_cast<int>(dims.size()); }
  std::size_t size() const { return data.size(); }

  // Rank-3 (C,H,W) accessors.
  int channels() const { require_rank3(); return static_cast<int>(dims[0]); }
  int height() const { require_rank3(); return static_cast<int>(dims[1]); }
  int width() const { require_rank3(); return static_cast<int>(dims[2]); }

  T& at(int c, int y, int x) {
    return data[(static_cast<std::size_t>(c) * dims[1] + y) * dims[2] + x];
  }
  const T& at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * dims[1] + y) * dims[2] + x];
  }

  /// Copies channel c out as a plane (rank-3 only).
  BasicPlane<T> channel(int c) const {
    require_rank3();
    if (c < 0 || c >= channels()) throw std::invalid_argument("channel: index out of range");
    BasicPlane<T> p(height(), width());
    const std::size_t hw = p.size();
    std::copy(data.begin() + c * hw, data.begin() + (c + 1) * hw, p.data.begin());
    return p;
  }

  void set_channel(int c, const BasicPlane<T>& p) {
    require_rank3();
    if (c < 0 || c >= channels()) throw std::invalid_argument("set_channel: index out of range");
    if (p.height != height() || p.width != width())
      throw std::invalid_argument("set_channel: plane shape mismatch");
    std::copy(p.data.begin(), p.data.end(), data.begin() + static_cast<std::size_t>(c) * p.size());
  }

  template <typename U>
  BasicTensor<U> cast() const {
    BasicTensor<U> out(dims);
    for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
    return out;
  }

 private:
  void require_rank3() const {
    if (dims.size() != 3) throw std::invalid_argument("tensor is not rank 3");
  }
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

template <typename T>
BasicTensor<T> tensor_from_channels(const std::vector<BasicPlane<T>>& planes) {
  if (planes.empty()) throw std::invalid_argument("tensor_from_channels: no planes");
  BasicTensor<T> t({static_cast<std::uint32_t>(planes.size()),
                    static_cast<std::uint32_t>(planes[0].height),
                    static_cast<std::uint32_t>(planes[0].width)});
  for (std::size_t c = 0; c < planes.size(); ++c) t.set_channel(static_cast<int>(c), planes[c]);
  return t;
}

template <typename T>
std::vector<BasicPlane<T>> channels_from_tensor(const BasicTensor<T>& t) {
  std::vector<BasicPlane<T>> planes;
  planes.reserve(t.channels());
  for (int c = 0; c < t.channels(); ++c) planes.push_back(t.channel(c));
  return planes;
}

/// Per-pixel category ids with 255 reserved as the ignore sentinel.
struct LabelMap {
  static constexpr std::uint8_t kIgnore = 255;

  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> labels;

  LabelMap() = default;

  LabelMap(int h, int w, std::uint8_t fill = 0) : height(h), width(w) {
    if (h < 1 || w < 1)
      throw std::invalid_argument("label map dimensions must be >= 1");
    labels.assign(static_cast<std::size_t>(h) * w, fill);
  }

  std::uint8_t& at(int y, int x) { return labels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int y, int x) const { return labels[static_cast<std::size_t>(y) * width + x]; }

  std::size_t size() const { return labels.size(); }
};

/// Deterministic 64-bit generator (splitmix64). Identical seeds produce
/// identical streams; all toolkit randomness flows through this type.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint32_t next_u32() { return static_cast<std::uint32_t>(next_u64() >> 32); }

  /// Uniform in [0, n). n must be >= 1.
  std::uint32_t below(std::uint32_t n) {
    if (n == 0) throw std::invalid_argument("SeededRng::below(0)");
    return static_cast<std::uint32_t>((static_cast<std::uint64_t>(next_u32()) * n) >> 32);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via the sum of 12 uniforms; exact-arithmetic
  /// deterministic, adequate for synthetic noise.
  double normal() {
    double s = 0.0;
    for (int i = 0; i < 12; ++i) s += uniform01();
    return s - 6.0;
  }

 private:
  std::uint64_t state_;
};

}  // namespace uhrseg
