#pragma once

// Gaussian pyramid and high-frequency residual stack.
//
// gaussian_reduce blurs with the separable 5-tap binomial [1,4,6,4,1]/16
// (edge-inclusive reflection: index -1 maps to 0, -2 to 1) and keeps the
// even-index samples. upsample_bilinear uses corner-aligned sampling with
// exact integer source coordinates. Both preserve constants exactly, so
// residuals of constant planes are identically zero.

#include "uhrseg/core.hpp"
#include "uhrseg/wavelet.hpp"

namespace uhrseg {

template <typename T>
struct BasicResidualStack {
  std::vector<BasicPlane<T>> residuals;  // residuals[i] at the resolution of the i-fold reduction
  BasicPlane<T> base;                    // coarsest Gaussian level
};

using ResidualStack = BasicResidualStack<float>;

namespace detail {

inline int reflect(int i, int n) {
  if (i < 0) return -i - 1;
  if (i >= n) return 2 * n - 1 - i;
  return i;
}

// Corner-aligned source coordinate of output index i: i*(in-1)/(out-1),
// kept as an exact integer quotient + remainder so that whole-number
// coordinates carry frac == 0 exactly.
inline void bilinear_axis(int i, int in_dim, int out_dim, int& base, double& frac) {
  if (in_dim == 1 || out_dim == 1) {
    base = 0;
    frac = 0.0;
    return;
  }
  const long long numer = static_cast<long long>(i) * (in_dim - 1);
  base = static_cast<int>(numer / (out_dim - 1));
  const long long rem = numer % (out_dim - 1);
  frac = static_cast<double>(rem) / (out_dim - 1);
}

}  // namespace detail

/// Blur + 2x decimation; output is ceil(H/2) x ceil(W/2).
template <typename T>
BasicPlane<T> gaussian_reduce(const BasicPlane<T>& p) {
  if (p.height < 2)
    throw std::invalid_argument("gaussian_reduce: height " + std::to_string(p.height) + " < 2");
  if (p.width < 2)
    throw std::invalid_argument("gaussian_reduce: width " + std::to_string(p.width) + " < 2");

  static constexpr double kTap[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
  const int oh = (p.height + 1) / 2, ow = (p.width + 1) / 2;

  // Each tap sum is written as center + sum of weighted differences; the
  // taps total 1, so constant neighborhoods come through without rounding.
  // vertical pass at even rows
  std::vector<double> tmp(static_cast<std::size_t>(oh) * p.width);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < p.width; ++x) {
      const double c = p.at(2 * y, x);
      double s = c;
      for (int k = -2; k <= 2; ++k) {
        if (k == 0) continue;
        s += kTap[k + 2] * (p.at(detail::reflect(2 * y + k, p.height), x) - c);
      }
      tmp[static_cast<std::size_t>(y) * p.width + x] = s;
    }
  }
  // horizontal pass at even columns
  BasicPlane<T> out(oh, ow);
  for (int y = 0; y < oh; ++y) {
    const double* row = tmp.data() + static_cast<std::size_t>(y) * p.width;
    for (int x = 0; x < ow; ++x) {
      const double c = row[2 * x];
      double s = c;
      for (int k = -2; k <= 2; ++k) {
        if (k == 0) continue;
        s += kTap[k + 2] * (row[detail::reflect(2 * x + k, p.width)] - c);
      }
      out.at(y, x) = static_cast<T>(s);
    }
  }
  return out;
}

/// Corner-aligned bilinear upsampling to out_h x out_w (each >= input).
template <typename T>
BasicPlane<T> upsample_bilinear(const BasicPlane<T>& p, int out_h, int out_w) {
  if (out_h < p.height || out_w < p.width)
    throw std::invalid_argument("upsample_bilinear: output " + std::to_string(out_h) + "x" +
                                std::to_string(out_w) + " smaller than input " +
                                std::to_string(p.height) + "x" + std::to_string(p.width));
  BasicPlane<T> out(out_h, out_w);

  for (int y = 0; y < out_h; ++y) {
    int y0;
    double fy;
    detail::bilinear_axis(y, p.height, out_h, y0, fy);
    const int y1 = fy > 0.0 ? y0 + 1 : y0;
    for (int x = 0; x < out_w; ++x) {
      int x0;
      double fx;
      detail::bilinear_axis(x, p.width, out_w, x0, fx);
      const int x1 = fx > 0.0 ? x0 + 1 : x0;
      const double a = p.at(y0, x0), b = p.at(y0, x1);
      const double c = p.at(y1, x0), d = p.at(y1, x1);
      const double top = a + fx * (b - a);
      const double bot = c + fx * (d - c);
      out.at(y, x) = static_cast<T>(top + fy * (bot - top));
    }
  }
  return out;
}

/// Residual stack: residuals[i] = g_i - U(g_{i+1}) for i in 0..levels-1,
/// base = g_levels. Telescoping the stack back up recovers the input.
template <typename T>
BasicResidualStack<T> laplacian_residuals(const BasicPlane<T>& p, int levels) {
  detail::require_divisible(p.height, p.width, levels);
  std::vector<BasicPlane<T>> gauss;
  gauss.push_back(p);
  for (int i = 0; i < levels; ++i) gauss.push_back(gaussian_reduce(gauss.back()));

  BasicResidualStack<T> stack;
  for (int i = 0; i < levels; ++i) {
    BasicPlane<T> up = upsample_bilinear(gauss[i + 1], gauss[i].height, gauss[i].width);
    BasicPlane<T> res(gauss[i].height, gauss[i].width);
    for (std::size_t k = 0; k < res.size(); ++k) res.data[k] = gauss[i].data[k] - up.data[k];
    stack.residuals.push_back(std::move(res));
  }
  stack.base = std::move(gauss.back());
  return stack;
}

/// Inverse of laplacian_residuals: g_i = H_i + U(g_{i+1}).
template <typename T>
BasicPlane<T> laplacian_reconstruct(const BasicResidualStack<T>& stack) {
  if (stack.residuals.empty()) throw std::invalid_argument("laplacian_reconstruct: empty stack");
  BasicPlane<T> cur = stack.base;
  for (int i = static_cast<int>(stack.residuals.size()) - 1; i >= 0; --i) {
    const BasicPlane<T>& res = stack.residuals[i];
    BasicPlane<T> up = upsample_bilinear(cur, res.height, res.width);
    for (std::size_t k = 0; k < up.size(); ++k) up.data[k] += res.data[k];
    cur = std::move(up);
  }
  return cur;
}

}  // namespace uhrseg
