#pragma once

// Training objectives.
//
// The wavelet reconstruction penalty wsl compares the full packet
// decompositions of a reference image and a reconstruction. At every
// level, each parent's first child (the low-frequency band) contributes
// lambda1 * mean-squared-difference and the three remaining children
// contribute lambda2 * mean-absolute-difference. Parts are summed over
// levels, parents and channels, then divided by the channel count.
// The L1 subgradient at a kink is taken as 0.

#include <cmath>

#include "uhrseg/core.hpp"
#include "uhrseg/wavelet.hpp"

namespace uhrseg {

struct LossWeights {
  double lambda1 = 1.0;  // low-frequency (L2) weight
  double lambda2 = 0.8;  // high-frequency (L1) weight
  double lambda3 = 0.1;  // auxiliary-head weight
  int depth = 3;         // packet levels

  void validate() const {
    if (lambda1 < 0 || lambda2 < 0 || lambda3 < 0)
      throw std::invalid_argument("loss weights must be >= 0");
    if (depth < 1) throw std::invalid_argument("packet depth must be >= 1");
  }
};

struct LossReport {
  double total = 0;
  double seg = 0;
  double aux = 0;
  double wsl = 0;
  double wsl_low = 0;
  double wsl_high = 0;
};

struct WslParts {
  double low = 0;
  double high = 0;
  double value() const { return low + high; }
};

namespace detail {

template <typename T>
void check_wsl_inputs(const std::vector<BasicPlane<T>>& a, const std::vector<BasicPlane<T>>& b,
                      const LossWeights& w) {
  w.validate();
  if (a.empty() || a.size() != b.size())
    throw std::invalid_argument("wsl: channel counts differ or are empty");
  for (std::size_t c = 0; c < a.size(); ++c) {
    if (!a[c].same_shape(b[c]))
      throw std::invalid_argument("wsl: channel " + std::to_string(c) + " shape mismatch");
    require_divisible(a[c].height, a[c].width, w.depth);
  }
}

}  // namespace detail

template <typename T>
WslParts wsl_value(const std::vector<BasicPlane<T>>& image,
                   const std::vector<BasicPlane<T>>& recon, const LossWeights& w) {
  detail::check_wsl_inputs(image, recon, w);
  WslParts parts;
  for (std::size_t c = 0; c < image.size(); ++c) {
    BasicPacketTree<T> tx = packet_decompose(image[c], w.depth);
    BasicPacketTree<T> ty = packet_decompose(recon[c], w.depth);
    for (int l = 1; l <= w.depth; ++l) {
      for (std::size_t idx = 0; idx < tx.nodes[l].size(); ++idx) {
        const BasicPlane<T>& x = tx.nodes[l][idx];
        const BasicPlane<T>& y = ty.nodes[l][idx];
        double acc = 0.0;
        if (idx % 4 == 0) {
          for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = static_cast<double>(x.data[i]) - static_cast<double>(y.data[i]);
            acc += d * d;
          }
          parts.low += w.lambda1 * acc / static_cast<double>(x.size());
        } else {
          for (std::size_t i = 0; i < x.size(); ++i)
            acc += std::abs(static_cast<double>(x.data[i]) - static_cast<double>(y.data[i]));
          parts.high += w.lambda2 * acc / static_cast<double>(x.size());
        }
      }
    }
  }
  parts.low /= static_cast<double>(image.size());
  parts.high /= static_cast<double>(image.size());
  return parts;
}

/// Gradient of wsl_value with respect to the reconstruction channels.
template <typename T>
std::vector<BasicPlane<T>> wsl_gradient(const std::vector<BasicPlane<T>>& image,
                                        const std::vector<BasicPlane<T>>& recon,
                                        const LossWeights& w) {
  detail::check_wsl_inputs(image, recon, w);
  const double inv_channels = 1.0 / static_cast<double>(image.size());
  std::vector<BasicPlane<T>> grads;
  grads.reserve(image.size());
  for (std::size_t c = 0; c < image.size(); ++c) {
    BasicPacketTree<T> tx = packet_decompose(image[c], w.depth);
    BasicPacketTree<T> ty = packet_decompose(recon[c], w.depth);

    BasicPacketTree<T> gt;
    gt.depth = w.depth;
    gt.nodes.resize(w.depth + 1);
    gt.nodes[0].push_back(BasicPlane<T>(image[c].height, image[c].width, T(0)));
    for (int l = 1; l <= w.depth; ++l) {
      gt.nodes[l].reserve(tx.nodes[l].size());
      for (std::size_t idx = 0; idx < tx.nodes[l].size(); ++idx) {
        const BasicPlane<T>& x = tx.nodes[l][idx];
        const BasicPlane<T>& y = ty.nodes[l][idx];
        BasicPlane<T> g(x.height, x.width);
        const double inv_n = 1.0 / static_cast<double>(x.size());
        if (idx % 4 == 0) {
          const double scale = 2.0 * w.lambda1 * inv_n * inv_channels;
          for (std::size_t i = 0; i < x.size(); ++i)
            g.data[i] = static_cast<T>(
                scale * (static_cast<double>(y.data[i]) - static_cast<double>(x.data[i])));
        } else {
          const double scale = w.lambda2 * inv_n * inv_channels;
          for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = static_cast<double>(y.data[i]) - static_cast<double>(x.data[i]);
            g.data[i] = static_cast<T>(d > 0 ? scale : (d < 0 ? -scale : 0.0));
          }
        }
        gt.nodes[l].push_back(std::move(g));
      }
    }
    grads.push_back(packet_adjoint_scatter(gt));
  }
  return grads;
}

template <typename T>
struct CrossEntropyResult {
  double value = 0;
  BasicTensor<T> grad;  // same shape as the logits, zero at ignore pixels
};

/// Mean over non-ignore pixels of -log softmax(logits)[label].
template <typename T>
CrossEntropyResult<T> cross_entropy(const BasicTensor<T>& logits, const LabelMap& labels) {
  if (logits.rank() != 3) throw std::invalid_argument("cross_entropy: logits must be CxHxW");
  const int C = logits.channels(), H = logits.height(), W = logits.width();
  if (H != labels.height || W != labels.width)
    throw std::invalid_argument("cross_entropy: logits " + std::to_string(H) + "x" +
                                std::to_string(W) + " vs labels " + std::to_string(labels.height) +
                                "x" + std::to_string(labels.width));

  std::size_t valid = 0;
  for (std::uint8_t v : labels.labels) {
    if (v == LabelMap::kIgnore) continue;
    if (v >= C)
      throw std::invalid_argument("cross_entropy: label " + std::to_string(v) +
                                  " >= category count " + std::to_string(C));
    ++valid;
  }
  if (valid == 0) throw std::invalid_argument("cross_entropy: no valid pixels");

  CrossEntropyResult<T> res;
  res.grad = BasicTensor<T>(logits.dims, T(0));
  const double inv_n = 1.0 / static_cast<double>(valid);
  std::vector<double> probs(C);
  double loss = 0.0;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const std::uint8_t label = labels.at(y, x);
      if (label == LabelMap::kIgnore) continue;
      double mx = logits.at(0, y, x);
      for (int c = 1; c < C; ++c) mx = std::max(mx, static_cast<double>(logits.at(c, y, x)));
      double denom = 0.0;
      for (int c = 0; c < C; ++c) {
        probs[c] = std::exp(static_cast<double>(logits.at(c, y, x)) - mx);
        denom += probs[c];
      }
      loss -= (static_cast<double>(logits.at(label, y, x)) - mx) - std::log(denom);
      for (int c = 0; c < C; ++c) {
        const double p = probs[c] / denom;
        res.grad.at(c, y, x) = static_cast<T>((p - (c == label ? 1.0 : 0.0)) * inv_n);
      }
    }
  }
  res.value = loss * inv_n;
  return res;
}

/// Combined objective: seg + lambda3 * aux + wsl.
template <typename T>
LossReport total_loss(const BasicTensor<T>& seg_logits, const BasicTensor<T>& aux_logits,
                      const LabelMap& labels, const std::vector<BasicPlane<T>>& image,
                      const std::vector<BasicPlane<T>>& recon, const LossWeights& w) {
  LossReport r;
  r.seg = cross_entropy(seg_logits, labels).value;
  r.aux = cross_entropy(aux_logits, labels).value;
  const WslParts parts = wsl_value(image, recon, w);
  r.wsl_low = parts.low;
  r.wsl_high = parts.high;
  r.wsl = parts.value();
  r.total = r.seg + w.lambda3 * r.aux + r.wsl;
  return r;
}

}  // namespace uhrseg
