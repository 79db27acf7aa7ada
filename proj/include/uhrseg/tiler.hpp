#pragma once

// Sliding-window tiling for images too large to process whole, and the
// inverse merge. Windows advance by patch - overlap; the final window
// on each axis is pulled back so it ends exactly at the image border,
// which may deepen the overlap there. Label merge takes a per-pixel
// majority vote (ties go to the smaller category id); logit merge
// averages. Both merges visit windows in a fixed geometric order, so
// the result does not depend on how the patch list was produced.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "uhrseg/core.hpp"

namespace uhrseg {

struct TileWindow {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;
};

struct TilePlan {
  int image_width = 0;
  int image_height = 0;
  int patch = 0;
  int overlap = 0;
  std::vector<TileWindow> windows;  // row-major: y outer, x inner
};

/// Window start offsets along one axis of length dim.
inline std::vector<int> axis_starts(int dim, int patch, int overlap) {
  if (dim < 1) throw std::invalid_argument("axis_starts: dim must be >= 1");
  if (patch < 1) throw std::invalid_argument("axis_starts: patch must be >= 1");
  if (overlap < 0 || overlap >= patch)
    throw std::invalid_argument("axis_starts: overlap must be in [0, patch)");
  const int stride = patch - overlap;
  std::vector<int> starts;
  for (int x = 0;; x += stride) {
    if (x + patch >= dim) {
      starts.push_back(std::max(0, dim - patch));
      break;
    }
    starts.push_back(x);
  }
  return starts;
}

inline TilePlan plan_tiles(int image_width, int image_height, int patch, int overlap) {
  TilePlan plan;
  plan.image_width = image_width;
  plan.image_height = image_height;
  plan.patch = patch;
  plan.overlap = overlap;
  const std::vector<int> xs = axis_starts(image_width, patch, overlap);
  const std::vector<int> ys = axis_starts(image_height, patch, overlap);
  const int w = std::min(patch, image_width);
  const int h = std::min(patch, image_height);
  plan.windows.reserve(xs.size() * ys.size());
  for (int y0 : ys)
    for (int x0 : xs) plan.windows.push_back({x0, y0, w, h});
  return plan;
}

namespace detail {

inline void check_window(const TileWindow& win, int width, int height) {
  if (win.width < 1 || win.height < 1 || win.x0 < 0 || win.y0 < 0 ||
      win.x0 + win.width > width || win.y0 + win.height > height)
    throw std::invalid_argument("tile window exceeds image bounds");
}

/// Window visit order fixed by geometry, independent of list order.
inline std::vector<std::size_t> geometry_order(const std::vector<TileWindow>& windows) {
  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const TileWindow &wa = windows[a], &wb = windows[b];
    return std::tie(wa.y0, wa.x0, wa.height, wa.width) <
           std::tie(wb.y0, wb.x0, wb.height, wb.width);
  });
  return order;
}

}  // namespace detail

template <typename T>
BasicPlane<T> crop_plane(const BasicPlane<T>& p, const TileWindow& win) {
  detail::check_window(win, p.width, p.height);
  BasicPlane<T> out(win.height, win.width);
  for (int y = 0; y < win.height; ++y)
    for (int x = 0; x < win.width; ++x) out.at(y, x) = p.at(win.y0 + y, win.x0 + x);
  return out;
}

inline LabelMap crop_labels(const LabelMap& m, const TileWindow& win) {
  detail::check_window(win, m.width, m.height);
  LabelMap out(win.height, win.width);
  for (int y = 0; y < win.height; ++y)
    for (int x = 0; x < win.width; ++x) out.at(y, x) = m.at(win.y0 + y, win.x0 + x);
  return out;
}

/// Majority vote over the label patches. patches[i] belongs to
/// plan.windows[i]. The ignore value wins a pixel only when no real
/// category received a vote there.
inline LabelMap merge_labels(const TilePlan& plan, const std::vector<LabelMap>& patches,
                             int categories) {
  if (categories < 1 || categories >= LabelMap::kIgnore)
    throw std::invalid_argument("merge_labels: category count out of range");
  if (patches.size() != plan.windows.size())
    throw std::invalid_argument("merge_labels: patch count does not match plan");
  for (std::size_t i = 0; i < patches.size(); ++i) {
    const TileWindow& win = plan.windows[i];
    detail::check_window(win, plan.image_width, plan.image_height);
    if (patches[i].width != win.width || patches[i].height != win.height)
      throw std::invalid_argument("merge_labels: patch " + std::to_string(i) +
                                  " shape does not match its window");
  }

  const std::vector<std::size_t> order = detail::geometry_order(plan.windows);
  LabelMap out(plan.image_height, plan.image_width);
  // votes[x * (categories + 1) + c]; the last slot counts ignore votes.
  std::vector<std::uint32_t> votes(static_cast<std::size_t>(plan.image_width) * (categories + 1));
  for (int y = 0; y < plan.image_height; ++y) {
    std::fill(votes.begin(), votes.end(), 0u);
    for (std::size_t i : order) {
      const TileWindow& win = plan.windows[i];
      if (y < win.y0 || y >= win.y0 + win.height) continue;
      for (int x = 0; x < win.width; ++x) {
        const std::uint8_t v = patches[i].at(y - win.y0, x);
        if (v != LabelMap::kIgnore && v >= categories)
          throw std::invalid_argument("merge_labels: label " + std::to_string(v) +
                                      " >= category count " + std::to_string(categories));
        const int slot = v == LabelMap::kIgnore ? categories : v;
        ++votes[static_cast<std::size_t>(win.x0 + x) * (categories + 1) + slot];
      }
    }
    for (int x = 0; x < plan.image_width; ++x) {
      const std::uint32_t* v = &votes[static_cast<std::size_t>(x) * (categories + 1)];
      int best = -1;
      std::uint32_t best_votes = 0;
      for (int c = 0; c < categories; ++c) {
        if (v[c] > best_votes) {
          best = c;
          best_votes = v[c];
        }
      }
      if (best < 0) {
        if (v[categories] == 0)
          throw std::invalid_argument("merge_labels: plan leaves a pixel uncovered");
        out.at(y, x) = LabelMap::kIgnore;
      } else {
        out.at(y, x) = static_cast<std::uint8_t>(best);
      }
    }
  }
  return out;
}

/// Per-pixel mean of the logit patches. patches[i] is CxHxW for
/// plan.windows[i]; all patches must agree on the channel count.
template <typename T>
BasicTensor<T> merge_logits(const TilePlan& plan, const std::vector<BasicTensor<T>>& patches) {
  if (patches.empty()) throw std::invalid_argument("merge_logits: no patches");
  if (patches.size() != plan.windows.size())
    throw std::invalid_argument("merge_logits: patch count does not match plan");
  const int C = patches[0].rank() == 3 ? patches[0].channels() : 0;
  if (C < 1) throw std::invalid_argument("merge_logits: patches must be CxHxW");
  for (std::size_t i = 0; i < patches.size(); ++i) {
    const TileWindow& win = plan.windows[i];
    detail::check_window(win, plan.image_width, plan.image_height);
    if (patches[i].rank() != 3 || patches[i].channels() != C ||
        patches[i].height() != win.height || patches[i].width() != win.width)
      throw std::invalid_argument("merge_logits: patch " + std::to_string(i) +
                                  " shape does not match its window");
  }

  const std::vector<std::size_t> order = detail::geometry_order(plan.windows);
  const std::size_t pixels =
      static_cast<std::size_t>(plan.image_width) * plan.image_height;
  std::vector<double> sums(pixels * C, 0.0);
  std::vector<std::uint32_t> counts(pixels, 0);
  for (std::size_t i : order) {
    const TileWindow& win = plan.windows[i];
    for (int y = 0; y < win.height; ++y) {
      for (int x = 0; x < win.width; ++x) {
        const std::size_t pix =
            static_cast<std::size_t>(win.y0 + y) * plan.image_width + (win.x0 + x);
        ++counts[pix];
        for (int c = 0; c < C; ++c)
          sums[pix * C + c] += static_cast<double>(patches[i].at(c, y, x));
      }
    }
  }

  BasicTensor<T> out(
      {static_cast<std::uint32_t>(C), static_cast<std::uint32_t>(plan.image_height),
       static_cast<std::uint32_t>(plan.image_width)},
      T(0));
  for (int y = 0; y < plan.image_height; ++y) {
    for (int x = 0; x < plan.image_width; ++x) {
      const std::size_t pix = static_cast<std::size_t>(y) * plan.image_width + x;
      if (counts[pix] == 0)
        throw std::invalid_argument("merge_logits: plan leaves a pixel uncovered");
      for (int c = 0; c < C; ++c)
        out.at(c, y, x) = static_cast<T>(sums[pix * C + c] / counts[pix]);
    }
  }
  return out;
}

}  // namespace uhrseg
