#pragma once

// A small two-branch segmentation network with manually written forward
// and backward passes, sized for procedural desk-scale scenes.
//
// The shallow branch runs strided 3x3 convolutions over a 6-channel
// stack of band-pass planes (finest Laplacian residual plus the next
// one upsampled). The deep branch runs on the depth-2 wavelet packet of
// the RGB input, and its output is carried back up through inverse
// transforms on channel groups. Three heads share the deep features:
// the fused segmentation head, an auxiliary segmentation head, and a
// reconstruction head whose inverse transform chain emits a full
// resolution image estimate for the wavelet penalty.
//
// Everything is deterministic: parameters come from a seeded generator,
// accumulation is sequential, and repeated runs produce bit-identical
// parameters.

#include <array>
#include <cmath>

#include "uhrseg/core.hpp"
#include "uhrseg/loss.hpp"
#include "uhrseg/pyramid.hpp"
#include "uhrseg/wavelet.hpp"

namespace uhrseg {

template <typename T>
struct BasicConvLayer {
  int in_channels = 0;
  int out_channels = 0;
  int ksize = 0;
  int stride = 0;
  std::vector<T> weights;  // [out][in][ky][kx]
  std::vector<T> bias;     // [out]

  BasicConvLayer() = default;

  BasicConvLayer(int in, int out, int k, int s)
      : in_channels(in), out_channels(out), ksize(k), stride(s) {
    if (in < 1 || out < 1) throw std::invalid_argument("conv layer needs >= 1 channel");
    if (k != 1 && k != 3) throw std::invalid_argument("conv layer supports ksize 1 or 3");
    if (s != 1 && s != 2) throw std::invalid_argument("conv layer supports stride 1 or 2");
    weights.assign(static_cast<std::size_t>(out) * in * k * k, T(0));
    bias.assign(out, T(0));
  }

  int pad() const { return (ksize - 1) / 2; }

  T& w(int o, int i, int ky, int kx) {
    return weights[((static_cast<std::size_t>(o) * in_channels + i) * ksize + ky) * ksize + kx];
  }
  const T& w(int o, int i, int ky, int kx) const {
    return weights[((static_cast<std::size_t>(o) * in_channels + i) * ksize + ky) * ksize + kx];
  }

  std::size_t parameter_count() const { return weights.size() + bias.size(); }
};

template <typename T>
struct BasicConvGrads {
  std::vector<T> weights;
  std::vector<T> bias;
};

template <typename T>
BasicTensor<T> conv_forward(const BasicConvLayer<T>& lay, const BasicTensor<T>& in) {
  if (in.rank() != 3 || in.channels() != lay.in_channels)
    throw std::invalid_argument("conv_forward: input channel mismatch");
  const int H = in.height(), W = in.width(), p = lay.pad(), k = lay.ksize, s = lay.stride;
  const int oh = (H + 2 * p - k) / s + 1, ow = (W + 2 * p - k) / s + 1;
  if (oh < 1 || ow < 1) throw std::invalid_argument("conv_forward: input too small");
  BasicTensor<T> out({static_cast<std::uint32_t>(lay.out_channels),
                      static_cast<std::uint32_t>(oh), static_cast<std::uint32_t>(ow)});
  for (int o = 0; o < lay.out_channels; ++o) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        double acc = static_cast<double>(lay.bias[o]);
        for (int i = 0; i < lay.in_channels; ++i) {
          for (int ky = 0; ky < k; ++ky) {
            const int y = oy * s + ky - p;
            if (y < 0 || y >= H) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int x = ox * s + kx - p;
              if (x < 0 || x >= W) continue;
              acc += static_cast<double>(lay.w(o, i, ky, kx)) *
                     static_cast<double>(in.at(i, y, x));
            }
          }
        }
        out.at(o, oy, ox) = static_cast<T>(acc);
      }
    }
  }
  return out;
}

/// Parameter and input gradients for one convolution. `in` must be the
/// tensor the forward pass consumed; returns the input gradient.
template <typename T>
BasicTensor<T> conv_backward(const BasicConvLayer<T>& lay, const BasicTensor<T>& in,
                             const BasicTensor<T>& dout, BasicConvGrads<T>& grads) {
  if (in.rank() != 3 || in.channels() != lay.in_channels)
    throw std::invalid_argument("conv_backward: input channel mismatch");
  if (dout.rank() != 3 || dout.channels() != lay.out_channels)
    throw std::invalid_argument("conv_backward: output-gradient channel mismatch");
  const int H = in.height(), W = in.width(), p = lay.pad(), k = lay.ksize, s = lay.stride;
  const int oh = dout.height(), ow = dout.width();
  if (oh != (H + 2 * p - k) / s + 1 || ow != (W + 2 * p - k) / s + 1)
    throw std::invalid_argument("conv_backward: output-gradient shape mismatch");

  std::vector<double> dw(lay.weights.size(), 0.0), db(lay.out_channels, 0.0);
  std::vector<double> din(in.data.size(), 0.0);
  for (int o = 0; o < lay.out_channels; ++o) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        const double g = static_cast<double>(dout.at(o, oy, ox));
        if (g == 0.0) continue;
        db[o] += g;
        for (int i = 0; i < lay.in_channels; ++i) {
          for (int ky = 0; ky < k; ++ky) {
            const int y = oy * s + ky - p;
            if (y < 0 || y >= H) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int x = ox * s + kx - p;
              if (x < 0 || x >= W) continue;
              const std::size_t widx =
                  ((static_cast<std::size_t>(o) * lay.in_channels + i) * k + ky) * k + kx;
              const std::size_t iidx = (static_cast<std::size_t>(i) * H + y) * W + x;
              dw[widx] += g * static_cast<double>(in.data[iidx]);
              din[iidx] += g * static_cast<double>(lay.weights[widx]);
            }
          }
        }
      }
    }
  }
  grads.weights.resize(lay.weights.size());
  grads.bias.resize(lay.bias.size());
  for (std::size_t i = 0; i < dw.size(); ++i) grads.weights[i] = static_cast<T>(dw[i]);
  for (std::size_t i = 0; i < db.size(); ++i) grads.bias[i] = static_cast<T>(db[i]);
  BasicTensor<T> dx(in.dims);
  for (std::size_t i = 0; i < din.size(); ++i) dx.data[i] = static_cast<T>(din[i]);
  return dx;
}

template <typename T>
void relu_inplace(BasicTensor<T>& t) {
  for (T& v : t.data)
    if (v < T(0)) v = T(0);
}

/// Zero the gradient wherever the stored post-activation is zero.
template <typename T>
void relu_mask_inplace(BasicTensor<T>& grad, const BasicTensor<T>& post) {
  if (grad.dims != post.dims) throw std::invalid_argument("relu_mask_inplace: shape mismatch");
  for (std::size_t i = 0; i < grad.data.size(); ++i)
    if (!(post.data[i] > T(0))) grad.data[i] = T(0);
}

template <typename T>
BasicTensor<T> upsample_chw(const BasicTensor<T>& t, int out_h, int out_w) {
  if (t.rank() != 3) throw std::invalid_argument("upsample_chw: tensor must be CxHxW");
  BasicTensor<T> out({t.dims[0], static_cast<std::uint32_t>(out_h),
                      static_cast<std::uint32_t>(out_w)});
  for (int c = 0; c < t.channels(); ++c)
    out.set_channel(c, upsample_bilinear(t.channel(c), out_h, out_w));
  return out;
}

/// Adjoint of upsample_chw: scatter each output gradient onto the four
/// source samples with its interpolation weights.
template <typename T>
BasicTensor<T> upsample_chw_adjoint(const BasicTensor<T>& dout, int in_h, int in_w) {
  if (dout.rank() != 3) throw std::invalid_argument("upsample_chw_adjoint: tensor must be CxHxW");
  const int oh = dout.height(), ow = dout.width();
  if (oh < in_h || ow < in_w)
    throw std::invalid_argument("upsample_chw_adjoint: output smaller than input");
  BasicTensor<T> out({dout.dims[0], static_cast<std::uint32_t>(in_h),
                      static_cast<std::uint32_t>(in_w)});
  std::vector<double> acc(static_cast<std::size_t>(in_h) * in_w);
  for (int c = 0; c < dout.channels(); ++c) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int y = 0; y < oh; ++y) {
      int y0;
      double fy;
      detail::bilinear_axis(y, in_h, oh, y0, fy);
      const int y1 = fy > 0.0 ? y0 + 1 : y0;
      for (int x = 0; x < ow; ++x) {
        int x0;
        double fx;
        detail::bilinear_axis(x, in_w, ow, x0, fx);
        const int x1 = fx > 0.0 ? x0 + 1 : x0;
        const double g = static_cast<double>(dout.at(c, y, x));
        acc[static_cast<std::size_t>(y0) * in_w + x0] += g * (1 - fy) * (1 - fx);
        acc[static_cast<std::size_t>(y0) * in_w + x1] += g * (1 - fy) * fx;
        acc[static_cast<std::size_t>(y1) * in_w + x0] += g * fy * (1 - fx);
        acc[static_cast<std::size_t>(y1) * in_w + x1] += g * fy * fx;
      }
    }
    for (int y = 0; y < in_h; ++y)
      for (int x = 0; x < in_w; ++x)
        out.at(c, y, x) = static_cast<T>(acc[static_cast<std::size_t>(y) * in_w + x]);
  }
  return out;
}

/// Forward transform on every channel: (C,H,W) -> (4C,H/2,W/2), each
/// input channel expanding to its four subbands in LL,LH,HL,HH order.
template <typename T>
BasicTensor<T> dwt_channel_groups(const BasicTensor<T>& t) {
  if (t.rank() != 3) throw std::invalid_argument("dwt_channel_groups: tensor must be CxHxW");
  detail::require_even(t.height(), t.width());
  BasicTensor<T> out({t.dims[0] * 4, t.dims[1] / 2, t.dims[2] / 2});
  for (int c = 0; c < t.channels(); ++c) {
    BasicSubbandQuad<T> q = dwt2(t.channel(c));
    out.set_channel(4 * c + 0, q.ll);
    out.set_channel(4 * c + 1, q.lh);
    out.set_channel(4 * c + 2, q.hl);
    out.set_channel(4 * c + 3, q.hh);
  }
  return out;
}

/// Inverse transform on channel quads: (4C,h,w) -> (C,2h,2w). Adjoint
/// of dwt_channel_groups (the transform is orthonormal).
template <typename T>
BasicTensor<T> iwt_channel_groups(const BasicTensor<T>& t) {
  if (t.rank() != 3) throw std::invalid_argument("iwt_channel_groups: tensor must be CxHxW");
  if (t.channels() % 4 != 0)
    throw std::invalid_argument("iwt_channel_groups: channel count must be a multiple of 4");
  BasicTensor<T> out({t.dims[0] / 4, t.dims[1] * 2, t.dims[2] * 2});
  for (int c = 0; c < out.channels(); ++c) {
    BasicSubbandQuad<T> q{t.channel(4 * c + 0), t.channel(4 * c + 1), t.channel(4 * c + 2),
                          t.channel(4 * c + 3)};
    out.set_channel(c, iwt2(q));
  }
  return out;
}

enum LayerId {
  kShallow1,
  kShallow2,
  kShallow3,
  kShallow4,
  kDeepProj,
  kDeep1,
  kDeep2,
  kDeep3,
  kDeepExpand,
  kFuse,
  kAux,
  kSr,
  kLayerCount
};

inline const char* layer_name(int id) {
  static constexpr const char* kNames[kLayerCount] = {
      "shallow1", "shallow2", "shallow3", "shallow4", "deep_proj", "deep1",
      "deep2",    "deep3",    "deep_expand", "fuse",  "aux",       "sr"};
  if (id < 0 || id >= kLayerCount) throw std::invalid_argument("layer_name: bad layer id");
  return kNames[id];
}

template <typename T>
struct BasicNetGrads {
  std::array<BasicConvGrads<T>, kLayerCount> layers;
};

template <typename T>
struct BasicTwoBranchNet {
  int categories = 0;
  std::array<BasicConvLayer<T>, kLayerCount> layers;

  explicit BasicTwoBranchNet(int cats) : categories(cats) {
    if (cats < 2 || cats >= LabelMap::kIgnore)
      throw std::invalid_argument("network needs 2..254 categories");
    layers[kShallow1] = BasicConvLayer<T>(6, 16, 3, 2);
    layers[kShallow2] = BasicConvLayer<T>(16, 32, 3, 2);
    layers[kShallow3] = BasicConvLayer<T>(32, 32, 3, 2);
    layers[kShallow4] = BasicConvLayer<T>(32, 32, 3, 2);
    layers[kDeepProj] = BasicConvLayer<T>(48, 32, 1, 1);
    layers[kDeep1] = BasicConvLayer<T>(32, 64, 3, 2);
    layers[kDeep2] = BasicConvLayer<T>(64, 64, 3, 2);
    layers[kDeep3] = BasicConvLayer<T>(64, 64, 3, 2);
    layers[kDeepExpand] = BasicConvLayer<T>(64, 256, 1, 1);
    layers[kFuse] = BasicConvLayer<T>(48, cats, 1, 1);
    layers[kAux] = BasicConvLayer<T>(16, cats, 1, 1);
    layers[kSr] = BasicConvLayer<T>(16, 192, 1, 1);
  }

  /// Uniform values in +-1/sqrt(fan_in), drawn layer by layer
  /// (weights, then biases) from one seeded stream.
  void init_parameters(std::uint64_t seed) {
    SeededRng rng(seed);
    for (BasicConvLayer<T>& lay : layers) {
      const double bound =
          1.0 / std::sqrt(static_cast<double>(lay.in_channels) * lay.ksize * lay.ksize);
      for (T& w : lay.weights) w = static_cast<T>((2.0 * rng.uniform01() - 1.0) * bound);
      for (T& b : lay.bias) b = static_cast<T>((2.0 * rng.uniform01() - 1.0) * bound);
    }
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const BasicConvLayer<T>& lay : layers) n += lay.parameter_count();
    return n;
  }
};

using TwoBranchNet = BasicTwoBranchNet<float>;

template <typename T>
std::vector<float> pack_parameters(const BasicTwoBranchNet<T>& net) {
  std::vector<float> flat;
  flat.reserve(net.parameter_count());
  for (const BasicConvLayer<T>& lay : net.layers) {
    for (const T& w : lay.weights) flat.push_back(static_cast<float>(w));
    for (const T& b : lay.bias) flat.push_back(static_cast<float>(b));
  }
  return flat;
}

template <typename T>
void unpack_parameters(BasicTwoBranchNet<T>& net, const std::vector<float>& flat) {
  if (flat.size() != net.parameter_count())
    throw std::invalid_argument("unpack_parameters: expected " +
                                std::to_string(net.parameter_count()) + " values, got " +
                                std::to_string(flat.size()));
  std::size_t k = 0;
  for (BasicConvLayer<T>& lay : net.layers) {
    for (T& w : lay.weights) w = static_cast<T>(flat[k++]);
    for (T& b : lay.bias) b = static_cast<T>(flat[k++]);
  }
}

template <typename T>
struct ForwardCache {
  BasicTensor<T> back_in;            // 6 x H x W band-pass stack
  BasicTensor<T> a1, a2, a3, a4;     // shallow post-activation features
  BasicTensor<T> shallow_out;        // 32 ch at 1/8
  BasicTensor<T> packet_in;          // 48 ch at 1/4
  BasicTensor<T> p1, d1, d2, d3;     // deep post-activation features
  BasicTensor<T> deep_out;           // 16 ch at 1/8
  BasicTensor<T> fused_in;           // 48 ch at 1/8
  BasicTensor<T> seg_small, aux_small, sr_coeffs;
  BasicTensor<T> seg_logits, aux_logits;  // categories x H x W
  std::vector<BasicPlane<T>> recon;       // 3 x H x W image estimate
};

namespace detail {

template <typename T>
void check_net_input(const std::vector<BasicPlane<T>>& image) {
  if (image.size() != 3) throw std::invalid_argument("network input must have 3 channels");
  for (const BasicPlane<T>& p : image)
    if (!p.same_shape(image[0])) throw std::invalid_argument("network input channels differ");
  if (image[0].height % 32 != 0 || image[0].width % 32 != 0 || image[0].height < 32 ||
      image[0].width < 32)
    throw std::invalid_argument("network input dims must be positive multiples of 32");
}

template <typename T>
void net_forward(const BasicTwoBranchNet<T>& net, const std::vector<BasicPlane<T>>& image,
                 ForwardCache<T>& c, bool with_heads) {
  check_net_input(image);
  const int H = image[0].height, W = image[0].width;

  std::vector<BasicPlane<T>> bands(6);
  for (int ch = 0; ch < 3; ++ch) {
    BasicResidualStack<T> stack = laplacian_residuals(image[ch], 2);
    bands[3 + ch] = upsample_bilinear(stack.residuals[1], H, W);
    bands[ch] = std::move(stack.residuals[0]);
  }
  c.back_in = tensor_from_channels(bands);

  c.a1 = conv_forward(net.layers[kShallow1], c.back_in);
  relu_inplace(c.a1);
  c.a2 = conv_forward(net.layers[kShallow2], c.a1);
  relu_inplace(c.a2);
  c.a3 = conv_forward(net.layers[kShallow3], c.a2);
  relu_inplace(c.a3);
  c.a4 = conv_forward(net.layers[kShallow4], c.a3);
  relu_inplace(c.a4);
  c.shallow_out = upsample_chw(c.a4, c.a3.height(), c.a3.width());
  for (std::size_t i = 0; i < c.shallow_out.data.size(); ++i)
    c.shallow_out.data[i] = static_cast<T>(c.shallow_out.data[i] + c.a3.data[i]);

  c.packet_in = dwt_channel_groups(dwt_channel_groups(tensor_from_channels(image)));
  c.p1 = conv_forward(net.layers[kDeepProj], c.packet_in);
  relu_inplace(c.p1);
  c.d1 = conv_forward(net.layers[kDeep1], c.p1);
  relu_inplace(c.d1);
  c.d2 = conv_forward(net.layers[kDeep2], c.d1);
  relu_inplace(c.d2);
  c.d3 = conv_forward(net.layers[kDeep3], c.d2);
  relu_inplace(c.d3);
  c.deep_out = iwt_channel_groups(iwt_channel_groups(conv_forward(net.layers[kDeepExpand], c.d3)));

  c.fused_in = BasicTensor<T>({static_cast<std::uint32_t>(48), c.deep_out.dims[1],
                               c.deep_out.dims[2]});
  for (int ch = 0; ch < 32; ++ch) c.fused_in.set_channel(ch, c.shallow_out.channel(ch));
  for (int ch = 0; ch < 16; ++ch) c.fused_in.set_channel(32 + ch, c.deep_out.channel(ch));
  c.seg_small = conv_forward(net.layers[kFuse], c.fused_in);
  c.seg_logits = upsample_chw(c.seg_small, H, W);

  if (!with_heads) return;
  c.aux_small = conv_forward(net.layers[kAux], c.deep_out);
  c.aux_logits = upsample_chw(c.aux_small, H, W);
  c.sr_coeffs = conv_forward(net.layers[kSr], c.deep_out);
  c.recon = channels_from_tensor(
      iwt_channel_groups(iwt_channel_groups(iwt_channel_groups(c.sr_coeffs))));
}

}  // namespace detail

template <typename T>
void forward(const BasicTwoBranchNet<T>& net, const std::vector<BasicPlane<T>>& image,
             ForwardCache<T>& cache) {
  detail::net_forward(net, image, cache, true);
}

/// Segmentation logits only; bitwise equal to forward()'s seg_logits.
template <typename T>
BasicTensor<T> infer_logits(const BasicTwoBranchNet<T>& net,
                            const std::vector<BasicPlane<T>>& image) {
  ForwardCache<T> cache;
  detail::net_forward(net, image, cache, false);
  return std::move(cache.seg_logits);
}

/// Per-pixel argmax over channels; ties go to the smaller category.
template <typename T>
LabelMap argmax_labels(const BasicTensor<T>& logits) {
  if (logits.rank() != 3) throw std::invalid_argument("argmax_labels: logits must be CxHxW");
  LabelMap out(logits.height(), logits.width());
  for (int y = 0; y < logits.height(); ++y) {
    for (int x = 0; x < logits.width(); ++x) {
      int best = 0;
      T best_v = logits.at(0, y, x);
      for (int ch = 1; ch < logits.channels(); ++ch) {
        if (logits.at(ch, y, x) > best_v) {
          best_v = logits.at(ch, y, x);
          best = ch;
        }
      }
      out.at(y, x) = static_cast<std::uint8_t>(best);
    }
  }
  return out;
}

/// Fraction of non-ignore truth pixels the prediction matches.
inline double pixel_accuracy(const LabelMap& pred, const LabelMap& truth) {
  if (pred.height != truth.height || pred.width != truth.width)
    throw std::invalid_argument("pixel_accuracy: shape mismatch");
  std::size_t valid = 0, hit = 0;
  for (std::size_t i = 0; i < truth.labels.size(); ++i) {
    if (truth.labels[i] == LabelMap::kIgnore) continue;
    ++valid;
    if (pred.labels[i] == truth.labels[i]) ++hit;
  }
  if (valid == 0) throw std::invalid_argument("pixel_accuracy: no valid pixels");
  return static_cast<double>(hit) / static_cast<double>(valid);
}

namespace detail {

template <typename T>
void add_tensor_inplace(BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.dims != b.dims) throw std::invalid_argument("tensor add: shape mismatch");
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] = static_cast<T>(a.data[i] + b.data[i]);
}

template <typename T>
BasicTensor<T> slice_channels(const BasicTensor<T>& t, int from, int count) {
  BasicTensor<T> out({static_cast<std::uint32_t>(count), t.dims[1], t.dims[2]});
  for (int c = 0; c < count; ++c) out.set_channel(c, t.channel(from + c));
  return out;
}

}  // namespace detail

template <typename T>
struct BackwardResult {
  BasicNetGrads<T> grads;
  LossReport loss;
};

/// Full parameter gradient of seg + lambda3 * aux + wsl for the cached
/// forward pass.
template <typename T>
BackwardResult<T> backward(const BasicTwoBranchNet<T>& net, const ForwardCache<T>& c,
                           const std::vector<BasicPlane<T>>& image, const LabelMap& labels,
                           const LossWeights& w) {
  BackwardResult<T> res;
  CrossEntropyResult<T> ce_seg = cross_entropy(c.seg_logits, labels);
  CrossEntropyResult<T> ce_aux = cross_entropy(c.aux_logits, labels);
  const WslParts parts = wsl_value(image, c.recon, w);
  res.loss.seg = ce_seg.value;
  res.loss.aux = ce_aux.value;
  res.loss.wsl_low = parts.low;
  res.loss.wsl_high = parts.high;
  res.loss.wsl = parts.value();
  res.loss.total = ce_seg.value + w.lambda3 * ce_aux.value + parts.value();

  auto& g = res.grads.layers;

  // fused segmentation head
  BasicTensor<T> d_seg_small =
      upsample_chw_adjoint(ce_seg.grad, c.seg_small.height(), c.seg_small.width());
  BasicTensor<T> d_fused = conv_backward(net.layers[kFuse], c.fused_in, d_seg_small, g[kFuse]);
  BasicTensor<T> d_shallow_out = detail::slice_channels(d_fused, 0, 32);
  BasicTensor<T> d_deep_out = detail::slice_channels(d_fused, 32, 16);

  // auxiliary head
  for (T& v : ce_aux.grad.data) v = static_cast<T>(v * w.lambda3);
  BasicTensor<T> d_aux_small =
      upsample_chw_adjoint(ce_aux.grad, c.aux_small.height(), c.aux_small.width());
  detail::add_tensor_inplace(d_deep_out,
                             conv_backward(net.layers[kAux], c.deep_out, d_aux_small, g[kAux]));

  // reconstruction head; forward ran inverse transforms, so the
  // gradient runs forward transforms
  BasicTensor<T> d_sr = dwt_channel_groups(dwt_channel_groups(
      dwt_channel_groups(tensor_from_channels(wsl_gradient(image, c.recon, w)))));
  detail::add_tensor_inplace(d_deep_out,
                             conv_backward(net.layers[kSr], c.deep_out, d_sr, g[kSr]));

  // deep branch
  BasicTensor<T> d_expand_out = dwt_channel_groups(dwt_channel_groups(d_deep_out));
  BasicTensor<T> d_d3 = conv_backward(net.layers[kDeepExpand], c.d3, d_expand_out, g[kDeepExpand]);
  relu_mask_inplace(d_d3, c.d3);
  BasicTensor<T> d_d2 = conv_backward(net.layers[kDeep3], c.d2, d_d3, g[kDeep3]);
  relu_mask_inplace(d_d2, c.d2);
  BasicTensor<T> d_d1 = conv_backward(net.layers[kDeep2], c.d1, d_d2, g[kDeep2]);
  relu_mask_inplace(d_d1, c.d1);
  BasicTensor<T> d_p1 = conv_backward(net.layers[kDeep1], c.p1, d_d1, g[kDeep1]);
  relu_mask_inplace(d_p1, c.p1);
  conv_backward(net.layers[kDeepProj], c.packet_in, d_p1, g[kDeepProj]);

  // shallow branch; a3 feeds both the residual add and shallow4
  BasicTensor<T> d_a4 = upsample_chw_adjoint(d_shallow_out, c.a4.height(), c.a4.width());
  relu_mask_inplace(d_a4, c.a4);
  BasicTensor<T> d_a3 = conv_backward(net.layers[kShallow4], c.a3, d_a4, g[kShallow4]);
  detail::add_tensor_inplace(d_a3, d_shallow_out);
  relu_mask_inplace(d_a3, c.a3);
  BasicTensor<T> d_a2 = conv_backward(net.layers[kShallow3], c.a2, d_a3, g[kShallow3]);
  relu_mask_inplace(d_a2, c.a2);
  BasicTensor<T> d_a1 = conv_backward(net.layers[kShallow2], c.a1, d_a2, g[kShallow2]);
  relu_mask_inplace(d_a1, c.a1);
  conv_backward(net.layers[kShallow1], c.back_in, d_a1, g[kShallow1]);

  return res;
}

struct TrainConfig {
  int iterations = 2000;
  double lr = 1e-3;
  double momentum = 0.9;
  double target_accuracy = -1;  // stop once reached, if positive
  LossWeights weights;
};

struct TrainRecord {
  LossReport loss;
  double accuracy = 0;
};

/// Full-image gradient descent with momentum on one scene. Records loss
/// and pixel accuracy per iteration; stops early once target_accuracy
/// is reached (the parameters that achieved it are kept).
template <typename T>
std::vector<TrainRecord> train_on_scene(BasicTwoBranchNet<T>& net,
                                        const std::vector<BasicPlane<T>>& image,
                                        const LabelMap& labels, const TrainConfig& cfg) {
  if (cfg.iterations < 1) throw std::invalid_argument("train: iterations must be >= 1");
  if (cfg.lr <= 0) throw std::invalid_argument("train: lr must be > 0");
  if (cfg.momentum < 0 || cfg.momentum >= 1)
    throw std::invalid_argument("train: momentum must be in [0, 1)");
  if (labels.height != image.at(0).height || labels.width != image.at(0).width)
    throw std::invalid_argument("train: labels do not match the image");

  std::array<std::vector<double>, kLayerCount> vel_w, vel_b;
  for (int li = 0; li < kLayerCount; ++li) {
    vel_w[li].assign(net.layers[li].weights.size(), 0.0);
    vel_b[li].assign(net.layers[li].bias.size(), 0.0);
  }

  std::vector<TrainRecord> history;
  history.reserve(cfg.iterations);
  ForwardCache<T> cache;
  for (int it = 0; it < cfg.iterations; ++it) {
    forward(net, image, cache);
    BackwardResult<T> res = backward(net, cache, image, labels, cfg.weights);
    const double acc = pixel_accuracy(argmax_labels(cache.seg_logits), labels);
    history.push_back({res.loss, acc});
    if (cfg.target_accuracy > 0 && acc >= cfg.target_accuracy) break;
    for (int li = 0; li < kLayerCount; ++li) {
      BasicConvLayer<T>& lay = net.layers[li];
      const BasicConvGrads<T>& lg = res.grads.layers[li];
      for (std::size_t k = 0; k < lay.weights.size(); ++k) {
        vel_w[li][k] = cfg.momentum * vel_w[li][k] + static_cast<double>(lg.weights[k]);
        lay.weights[k] = static_cast<T>(static_cast<double>(lay.weights[k]) - cfg.lr * vel_w[li][k]);
      }
      for (std::size_t k = 0; k < lay.bias.size(); ++k) {
        vel_b[li][k] = cfg.momentum * vel_b[li][k] + static_cast<double>(lg.bias[k]);
        lay.bias[k] = static_cast<T>(static_cast<double>(lay.bias[k]) - cfg.lr * vel_b[li][k]);
      }
    }
  }
  return history;
}

template <typename T>
struct BasicScene {
  std::vector<BasicPlane<T>> image;  // 3 channels in [0, 1]
  LabelMap labels;
};

using Scene = BasicScene<float>;

/// Procedural scene: flat-colored background plus 2-4 overlapping
/// rectangles and ellipses, shaded with a low-amplitude sinusoid and
/// pixel noise. At least two categories are always visible.
template <typename T>
BasicScene<T> gen_scene(int height, int width, int categories, SeededRng& rng) {
  if (height < 8 || width < 8) throw std::invalid_argument("gen_scene: scene must be >= 8x8");
  if (categories < 2 || categories >= LabelMap::kIgnore)
    throw std::invalid_argument("gen_scene: needs 2..254 categories");

  std::vector<std::array<double, 3>> palette(categories);
  for (auto& col : palette)
    for (double& v : col) v = 0.15 + 0.7 * rng.uniform01();

  BasicScene<T> scene;
  scene.labels = LabelMap(height, width, 0);
  for (;;) {
    std::fill(scene.labels.labels.begin(), scene.labels.labels.end(), 0);
    const int shapes = 2 + static_cast<int>(rng.below(3));
    for (int s = 0; s < shapes; ++s) {
      const auto cat = static_cast<std::uint8_t>(1 + rng.below(categories - 1));
      const bool ellipse = rng.below(2) == 1;
      const int a = 10 + static_cast<int>(rng.below(11));
      const int b = 10 + static_cast<int>(rng.below(11));
      const int cx = width > 2 * a ? a + static_cast<int>(rng.below(width - 2 * a))
                                   : static_cast<int>(rng.below(width));
      const int cy = height > 2 * b ? b + static_cast<int>(rng.below(height - 2 * b))
                                    : static_cast<int>(rng.below(height));
      for (int y = std::max(0, cy - b); y <= std::min(height - 1, cy + b); ++y) {
        for (int x = std::max(0, cx - a); x <= std::min(width - 1, cx + a); ++x) {
          if (ellipse) {
            const double dx = (x - cx) / static_cast<double>(a);
            const double dy = (y - cy) / static_cast<double>(b);
            if (dx * dx + dy * dy > 1.0) continue;
          }
          scene.labels.at(y, x) = cat;
        }
      }
    }
    std::vector<int> seen(categories, 0);
    for (std::uint8_t v : scene.labels.labels) seen[v] = 1;
    int distinct = 0;
    for (int s : seen) distinct += s;
    if (distinct >= 2) break;
  }

  constexpr double kTwoPi = 6.283185307179586;
  for (int ch = 0; ch < 3; ++ch) {
    const double fx = (1.0 + rng.below(3)) / 16.0;
    const double fy = (1.0 + rng.below(3)) / 16.0;
    const double phase = kTwoPi * rng.uniform01();
    BasicPlane<T> plane(height, width);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        double v = palette[scene.labels.at(y, x)][ch];
        v += 0.08 * std::sin(kTwoPi * (fx * x + fy * y) + phase);
        v += 0.05 * rng.normal();
        plane.at(y, x) = static_cast<T>(std::min(1.0, std::max(0.0, v)));
      }
    }
    scene.image.push_back(std::move(plane));
  }
  return scene;
}

}  // namespace uhrseg
