#pragma once

// Orthonormal Haar transforms on planes.
//
// One level maps a 2x2 block [[a,b],[c,d]] to four half-resolution
// subbands with gain-1/2 filters:
//   ll = (a+b+c+d)/2    lh = (a+b-c-d)/2
//   hl = (a-b+c-d)/2    hh = (a-b-c+d)/2
// Blocks are disjoint, so the transform is orthonormal: energy is
// conserved, the inverse is exact, and the adjoint equals the inverse.
//
// Two recursive forms are provided: the Mallat pyramid (only LL is
// decomposed further) and the full packet tree (all four children are
// decomposed), which backs the wavelet-domain reconstruction loss.

#include <cmath>

#include "uhrseg/core.hpp"

namespace uhrseg {

template <typename T>
struct BasicSubbandQuad {
  BasicPlane<T> ll, lh, hl, hh;

  bool same_shape(const BasicSubbandQuad& o) const {
    return ll.same_shape(o.ll) && lh.same_shape(o.lh) && hl.same_shape(o.hl) && hh.same_shape(o.hh);
  }
};

using SubbandQuad = BasicSubbandQuad<float>;

/// Per-level detail subbands of the Mallat form (LL is carried separately).
template <typename T>
struct BasicDetailTriple {
  BasicPlane<T> lh, hl, hh;
};

template <typename T>
struct BasicMallatPyramid {
  BasicPlane<T> low;                            // (H/2^L) x (W/2^L)
  std::vector<BasicDetailTriple<T>> details;    // details[l] = level l+1, finest first
};

using MallatPyramid = BasicMallatPyramid<float>;

/// Full wavelet-packet tree. nodes[l] holds the 4^l planes of level l in
/// recursive child order: parent j yields children at 4j+k with
/// k = 0:LL, 1:LH, 2:HL, 3:HH. nodes[0] is the input plane itself.
template <typename T>
struct BasicPacketTree {
  int depth = 0;
  std::vector<std::vector<BasicPlane<T>>> nodes;
};

using PacketTree = BasicPacketTree<float>;

namespace detail {

inline void require_even(int h, int w) {
  if (h % 2 != 0)
    throw std::invalid_argument("height " + std::to_string(h) + " is odd; dwt2 requires even dimensions");
  if (w % 2 != 0)
    throw std::invalid_argument("width " + std::to_string(w) + " is odd; dwt2 requires even dimensions");
}

inline void require_divisible(int h, int w, int levels) {
  if (levels < 1) throw std::invalid_argument("levels must be >= 1");
  const long long div = 1ll << levels;
  if (h % div != 0)
    throw std::invalid_argument("height " + std::to_string(h) + " not divisible by " +
                                std::to_string(div) + " (levels=" + std::to_string(levels) + ")");
  if (w % div != 0)
    throw std::invalid_argument("width " + std::to_string(w) + " not divisible by " +
                                std::to_string(div) + " (levels=" + std::to_string(levels) + ")");
}

}  // namespace detail

template <typename T>
BasicSubbandQuad<T> dwt2(const BasicPlane<T>& p) {
  detail::require_even(p.height, p.width);
  const int hh2 = p.height / 2, wh2 = p.width / 2;
  BasicSubbandQuad<T> q{BasicPlane<T>(hh2, wh2), BasicPlane<T>(hh2, wh2),
                        BasicPlane<T>(hh2, wh2), BasicPlane<T>(hh2, wh2)};
  for (int y = 0; y < hh2; ++y) {
    for (int x = 0; x < wh2; ++x) {
      const double a = p.at(2 * y, 2 * x);
      const double b = p.at(2 * y, 2 * x + 1);
      const double c = p.at(2 * y + 1, 2 * x);
      const double d = p.at(2 * y + 1, 2 * x + 1);
      q.ll.at(y, x) = static_cast<T>((a + b + c + d) * 0.5);
      q.lh.at(y, x) = static_cast<T>((a + b - c - d) * 0.5);
      q.hl.at(y, x) = static_cast<T>((a - b + c - d) * 0.5);
      q.hh.at(y, x) = static_cast<T>((a - b - c + d) * 0.5);
    }
  }
  return q;
}

template <typename T>
BasicPlane<T> iwt2(const BasicSubbandQuad<T>& q) {
  if (!(q.ll.same_shape(q.lh) && q.ll.same_shape(q.hl) && q.ll.same_shape(q.hh)))
    throw std::invalid_argument("iwt2: subband shapes differ");
  BasicPlane<T> p(q.ll.height * 2, q.ll.width * 2);
  for (int y = 0; y < q.ll.height; ++y) {
    for (int x = 0; x < q.ll.width; ++x) {
      const double ll = q.ll.at(y, x), lh = q.lh.at(y, x);
      const double hl = q.hl.at(y, x), hh = q.hh.at(y, x);
      p.at(2 * y, 2 * x) = static_cast<T>((ll + lh + hl + hh) * 0.5);
      p.at(2 * y, 2 * x + 1) = static_cast<T>((ll + lh - hl - hh) * 0.5);
      p.at(2 * y + 1, 2 * x) = static_cast<T>((ll - lh + hl - hh) * 0.5);
      p.at(2 * y + 1, 2 * x + 1) = static_cast<T>((ll - lh - hl + hh) * 0.5);
    }
  }
  return p;
}

/// Mallat decomposition: recursively splits only the LL band.
template <typename T>
BasicMallatPyramid<T> dwt_multilevel(const BasicPlane<T>& p, int levels) {
  detail::require_divisible(p.height, p.width, levels);
  BasicMallatPyramid<T> out;
  BasicPlane<T> cur = p;
  for (int l = 0; l < levels; ++l) {
    BasicSubbandQuad<T> q = dwt2(cur);
    out.details.push_back({std::move(q.lh), std::move(q.hl), std::move(q.hh)});
    cur = std::move(q.ll);
  }
  out.low = std::move(cur);
  return out;
}

template <typename T>
BasicPlane<T> iwt_multilevel(const BasicMallatPyramid<T>& pyr) {
  if (pyr.details.empty()) throw std::invalid_argument("iwt_multilevel: no levels");
  BasicPlane<T> cur = pyr.low;
  for (int l = static_cast<int>(pyr.details.size()) - 1; l >= 0; --l) {
    const BasicDetailTriple<T>& d = pyr.details[l];
    cur = iwt2(BasicSubbandQuad<T>{std::move(cur), d.lh, d.hl, d.hh});
  }
  return cur;
}

/// Full packet decomposition: every node of level l-1 is split into four
/// children at level l.
template <typename T>
BasicPacketTree<T> packet_decompose(const BasicPlane<T>& p, int depth) {
  detail::require_divisible(p.height, p.width, depth);
  BasicPacketTree<T> tree;
  tree.depth = depth;
  tree.nodes.resize(depth + 1);
  tree.nodes[0].push_back(p);
  for (int l = 1; l <= depth; ++l) {
    tree.nodes[l].reserve(tree.nodes[l - 1].size() * 4);
    for (const BasicPlane<T>& parent : tree.nodes[l - 1]) {
      BasicSubbandQuad<T> q = dwt2(parent);
      tree.nodes[l].push_back(std::move(q.ll));
      tree.nodes[l].push_back(std::move(q.lh));
      tree.nodes[l].push_back(std::move(q.hl));
      tree.nodes[l].push_back(std::move(q.hh));
    }
  }
  return tree;
}

/// Adjoint of dwt2. For the orthonormal filters this is the inverse
/// transform, which lets loss gradients on subbands flow back to image
/// space.
template <typename T>
BasicPlane<T> dwt_adjoint_scatter(const BasicSubbandQuad<T>& grad) {
  return iwt2(grad);
}

/// Adjoint of packet_decompose. `grad.nodes[l]` holds gradients with
/// respect to the level-l nodes (zero planes where a level carries no
/// penalty); contributions are accumulated down to level 0.
template <typename T>
BasicPlane<T> packet_adjoint_scatter(const BasicPacketTree<T>& grad) {
  if (grad.depth < 1 || grad.nodes.size() != static_cast<std::size_t>(grad.depth) + 1)
    throw std::invalid_argument("packet_adjoint_scatter: malformed tree");
  std::vector<std::vector<BasicPlane<T>>> acc = grad.nodes;
  for (int l = grad.depth; l >= 1; --l) {
    if (acc[l].size() != acc[l - 1].size() * 4)
      throw std::invalid_argument("packet_adjoint_scatter: level " + std::to_string(l) +
                                  " node count mismatch");
    for (std::size_t j = 0; j < acc[l - 1].size(); ++j) {
      BasicPlane<T> up = iwt2(BasicSubbandQuad<T>{acc[l][4 * j + 0], acc[l][4 * j + 1],
                                                  acc[l][4 * j + 2], acc[l][4 * j + 3]});
      BasicPlane<T>& dst = acc[l - 1][j];
      if (!dst.same_shape(up))
        throw std::invalid_argument("packet_adjoint_scatter: shape mismatch at level " +
                                    std::to_string(l - 1));
      for (std::size_t i = 0; i < dst.size(); ++i) dst.data[i] += up.data[i];
    }
  }
  return std::move(acc[0][0]);
}

/// Packs a Mallat pyramid into one plane of the original size using the
/// recursive quadrant layout (per level: LL top-left, LH top-right,
/// HL bottom-left, HH bottom-right). This is the on-disk layout used by
/// the CLI's raw tensor files.
template <typename T>
BasicPlane<T> mallat_pack(const BasicMallatPyramid<T>& pyr) {
  if (pyr.details.empty()) throw std::invalid_argument("mallat_pack: no levels");
  const int levels = static_cast<int>(pyr.details.size());
  BasicPlane<T> out(pyr.details[0].lh.height * 2, pyr.details[0].lh.width * 2);
  // coarsest corner first
  for (int y = 0; y < pyr.low.height; ++y)
    for (int x = 0; x < pyr.low.width; ++x) out.at(y, x) = pyr.low.at(y, x);
  for (int l = levels - 1; l >= 0; --l) {
    const BasicDetailTriple<T>& d = pyr.details[l];
    const int sh = d.lh.height, sw = d.lh.width;
    for (int y = 0; y < sh; ++y) {
      for (int x = 0; x < sw; ++x) {
        out.at(y, x + sw) = d.lh.at(y, x);
        out.at(y + sh, x) = d.hl.at(y, x);
        out.at(y + sh, x + sw) = d.hh.at(y, x);
      }
    }
  }
  return out;
}

template <typename T>
BasicMallatPyramid<T> mallat_unpack(const BasicPlane<T>& packed, int levels) {
  detail::require_divisible(packed.height, packed.width, levels);
  BasicMallatPyramid<T> pyr;
  int sh = packed.height, sw = packed.width;
  for (int l = 0; l < levels; ++l) {
    sh /= 2;
    sw /= 2;
    BasicDetailTriple<T> d{BasicPlane<T>(sh, sw), BasicPlane<T>(sh, sw), BasicPlane<T>(sh, sw)};
    for (int y = 0; y < sh; ++y) {
      for (int x = 0; x < sw; ++x) {
        d.lh.at(y, x) = packed.at(y, x + sw);
        d.hl.at(y, x) = packed.at(y + sh, x);
        d.hh.at(y, x) = packed.at(y + sh, x + sw);
      }
    }
    pyr.details.push_back(std::move(d));
  }
  pyr.low = BasicPlane<T>(sh, sw);
  for (int y = 0; y < sh; ++y)
    for (int x = 0; x < sw; ++x) pyr.low.at(y, x) = packed.at(y, x);
  return pyr;
}

/// Sum of squared samples, accumulated in double.
template <typename T>
double plane_energy(const BasicPlane<T>& p) {
  double e = 0.0;
  for (T v : p.data) e += static_cast<double>(v) * static_cast<double>(v);
  return e;
}

template <typename T>
double plane_dot(const BasicPlane<T>& a, const BasicPlane<T>& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("plane_dot: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    s += static_cast<double>(a.data[i]) * static_cast<double>(b.data[i]);
  return s;
}

}  // namespace uhrseg
