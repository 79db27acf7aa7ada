#pragma once

// Segmentation quality metrics over a running confusion matrix.
// Rows index ground truth, columns index prediction. A pixel counts
// only when neither side carries the ignore value. Macro averages
// skip categories with zero support (no ground-truth pixels).

#include <cstdint>
#include <vector>

#include "uhrseg/core.hpp"

namespace uhrseg {

struct CategoryScore {
  int category = 0;
  std::uint64_t support = 0;  // ground-truth pixel count
  double iou = 0;
  double f1 = 0;
};

class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int categories) : categories_(categories) {
    if (categories < 1) throw std::invalid_argument("confusion matrix needs >= 1 category");
    if (categories > 255)
      throw std::invalid_argument("confusion matrix capped at 255 categories (255 is ignore)");
    cells_.assign(static_cast<std::size_t>(categories) * categories, 0);
  }

  int categories() const { return categories_; }

  std::uint64_t cell(int truth, int pred) const {
    if (truth < 0 || truth >= categories_ || pred < 0 || pred >= categories_)
      throw std::invalid_argument("confusion matrix index out of range");
    return cells_[static_cast<std::size_t>(truth) * categories_ + pred];
  }

  void add(int truth, int pred, std::uint64_t n = 1) {
    if (truth < 0 || truth >= categories_ || pred < 0 || pred >= categories_)
      throw std::invalid_argument("confusion matrix index out of range");
    cells_[static_cast<std::size_t>(truth) * categories_ + pred] += n;
  }

  void accumulate(const LabelMap& pred, const LabelMap& truth) {
    if (pred.height != truth.height || pred.width != truth.width)
      throw std::invalid_argument("confusion matrix: prediction and truth shapes differ");
    for (std::size_t i = 0; i < truth.labels.size(); ++i) {
      const std::uint8_t t = truth.labels[i], p = pred.labels[i];
      if (t == LabelMap::kIgnore || p == LabelMap::kIgnore) continue;
      if (t >= categories_ || p >= categories_)
        throw std::invalid_argument("confusion matrix: label " +
                                    std::to_string(std::max(t, p)) + " >= category count " +
                                    std::to_string(categories_));
      ++cells_[static_cast<std::size_t>(t) * categories_ + p];
    }
  }

  std::uint64_t total() const {
    std::uint64_t s = 0;
    for (std::uint64_t v : cells_) s += v;
    return s;
  }

  std::vector<CategoryScore> category_scores() const {
    std::vector<CategoryScore> out(categories_);
    for (int c = 0; c < categories_; ++c) {
      std::uint64_t tp = cell(c, c), fp = 0, fn = 0;
      for (int k = 0; k < categories_; ++k) {
        if (k == c) continue;
        fp += cell(k, c);
        fn += cell(c, k);
      }
      out[c].category = c;
      out[c].support = tp + fn;
      const std::uint64_t denom_iou = tp + fp + fn;
      out[c].iou = denom_iou ? static_cast<double>(tp) / static_cast<double>(denom_iou) : 0.0;
      const std::uint64_t denom_f1 = 2 * tp + fp + fn;
      out[c].f1 = denom_f1 ? 2.0 * static_cast<double>(tp) / static_cast<double>(denom_f1) : 0.0;
    }
    return out;
  }

  /// Macro-averaged IoU over categories with nonzero support.
  double mean_iou() const { return macro([](const CategoryScore& s) { return s.iou; }); }

  /// Macro-averaged F1 over categories with nonzero support.
  double macro_f1() const { return macro([](const CategoryScore& s) { return s.f1; }); }

  double accuracy() const {
    const std::uint64_t n = total();
    if (n == 0) throw std::invalid_argument("confusion matrix is empty");
    std::uint64_t tp = 0;
    for (int c = 0; c < categories_; ++c) tp += cell(c, c);
    return static_cast<double>(tp) / static_cast<double>(n);
  }

 private:
  template <typename Pick>
  double macro(Pick pick) const {
    if (total() == 0) throw std::invalid_argument("confusion matrix is empty");
    double sum = 0.0;
    int n = 0;
    for (const CategoryScore& s : category_scores()) {
      if (s.support == 0) continue;
      sum += pick(s);
      ++n;
    }
    if (n == 0) throw std::invalid_argument("no category has ground-truth support");
    return sum / n;
  }

  int categories_;
  std::vector<std::uint64_t> cells_;
};

}  // namespace uhrseg
