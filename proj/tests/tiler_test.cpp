#include "uhrseg/tiler.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <numeric>
#include <vector>

using namespace uhrseg;

namespace {

LabelMap random_labels(int h, int w, int categories, SeededRng& rng, bool with_ignore) {
  LabelMap m(h, w);
  for (auto& v : m.labels) {
    if (with_ignore && rng.below(10) == 0)
      v = LabelMap::kIgnore;
    else
      v = static_cast<std::uint8_t>(rng.below(static_cast<std::uint32_t>(categories)));
  }
  return m;
}

}  // namespace

TEST(AxisStarts, KnownWideAxis) {
  const std::vector<int> expect{0, 880, 1760, 2640, 3520, 4120};
  EXPECT_EQ(axis_starts(5120, 1000, 120), expect);
}

TEST(AxisStarts, AxisNoLargerThanPatchGivesSingleWindow) {
  EXPECT_EQ(axis_starts(100, 100, 10), std::vector<int>{0});
  EXPECT_EQ(axis_starts(37, 100, 10), std::vector<int>{0});
  EXPECT_EQ(axis_starts(1, 1, 0), std::vector<int>{0});
}

TEST(AxisStarts, LastWindowEndsAtBorder) {
  const std::vector<int> starts = axis_starts(5120, 1000, 120);
  EXPECT_EQ(starts.back() + 1000, 5120);
}

TEST(AxisStarts, Validation) {
  EXPECT_THROW(axis_starts(0, 10, 0), std::invalid_argument);
  EXPECT_THROW(axis_starts(10, 0, 0), std::invalid_argument);
  EXPECT_THROW(axis_starts(10, 5, 5), std::invalid_argument);
  EXPECT_THROW(axis_starts(10, 5, -1), std::invalid_argument);
}

// Every (dim, patch, overlap) combination in a small box: starts must
// be strictly increasing, in bounds, and their windows must cover the
// whole axis.
TEST(AxisStarts, ExhaustiveCoverageSweep) {
  for (int dim = 1; dim <= 40; ++dim) {
    for (int patch = 1; patch <= 12; ++patch) {
      for (int overlap = 0; overlap < patch; ++overlap) {
        const std::vector<int> starts = axis_starts(dim, patch, overlap);
        const int w = std::min(patch, dim);
        ASSERT_FALSE(starts.empty());
        std::vector<bool> covered(dim, false);
        int prev = -1;
        for (int s : starts) {
          ASSERT_GT(s, prev) << dim << "/" << patch << "/" << overlap;
          ASSERT_GE(s, 0);
          ASSERT_LE(s + w, dim);
          for (int i = s; i < s + w; ++i) covered[i] = true;
          prev = s;
        }
        for (int i = 0; i < dim; ++i)
          ASSERT_TRUE(covered[i]) << "pixel " << i << " uncovered at " << dim << "/" << patch
                                  << "/" << overlap;
      }
    }
  }
}

TEST(TilePlan, KnownGridIsRowMajor) {
  const TilePlan plan = plan_tiles(5120, 5120, 1000, 120);
  ASSERT_EQ(plan.windows.size(), 36u);
  for (const TileWindow& w : plan.windows) {
    EXPECT_EQ(w.width, 1000);
    EXPECT_EQ(w.height, 1000);
  }
  EXPECT_EQ(plan.windows[0].x0, 0);
  EXPECT_EQ(plan.windows[0].y0, 0);
  EXPECT_EQ(plan.windows[1].x0, 880);
  EXPECT_EQ(plan.windows[1].y0, 0);
  EXPECT_EQ(plan.windows[6].x0, 0);
  EXPECT_EQ(plan.windows[6].y0, 880);
  EXPECT_EQ(plan.windows[35].x0, 4120);
  EXPECT_EQ(plan.windows[35].y0, 4120);
}

TEST(TilePlan, WindowsShrinkToImage) {
  const TilePlan plan = plan_tiles(7, 5, 16, 4);
  ASSERT_EQ(plan.windows.size(), 1u);
  EXPECT_EQ(plan.windows[0].width, 7);
  EXPECT_EQ(plan.windows[0].height, 5);
}

TEST(Crop, PlaneAndLabelsTakeTheWindow) {
  Plane p(4, 5);
  std::iota(p.data.begin(), p.data.end(), 0.0f);
  const TileWindow win{1, 2, 3, 2};
  const Plane c = crop_plane(p, win);
  ASSERT_EQ(c.height, 2);
  ASSERT_EQ(c.width, 3);
  EXPECT_EQ(c.at(0, 0), p.at(2, 1));
  EXPECT_EQ(c.at(1, 2), p.at(3, 3));

  LabelMap m(4, 5);
  for (std::size_t i = 0; i < m.labels.size(); ++i)
    m.labels[i] = static_cast<std::uint8_t>(i);
  const LabelMap mc = crop_labels(m, win);
  EXPECT_EQ(mc.at(0, 0), m.at(2, 1));
  EXPECT_EQ(mc.at(1, 2), m.at(3, 3));

  EXPECT_THROW(crop_plane(p, TileWindow{3, 0, 3, 2}), std::invalid_argument);
  EXPECT_THROW(crop_labels(m, TileWindow{0, 0, 0, 1}), std::invalid_argument);
}

TEST(MergeLabels, CropThenMergeIsIdentity) {
  SeededRng rng(71);
  for (int trial = 0; trial < 50; ++trial) {
    const int h = 1 + static_cast<int>(rng.below(48));
    const int w = 1 + static_cast<int>(rng.below(48));
    const int patch = 1 + static_cast<int>(rng.below(16));
    const int overlap = static_cast<int>(rng.below(static_cast<std::uint32_t>(patch)));
    const int categories = 2 + static_cast<int>(rng.below(5));
    const LabelMap src = random_labels(h, w, categories, rng, true);
    const TilePlan plan = plan_tiles(w, h, patch, overlap);
    std::vector<LabelMap> patches;
    for (const TileWindow& win : plan.windows) patches.push_back(crop_labels(src, win));
    const LabelMap merged = merge_labels(plan, patches, categories);
    ASSERT_EQ(merged.labels, src.labels) << "trial " << trial;
  }
}

// One row, patch 2, overlap 1: windows [0,2) and [1,3); pixel 1 is
// covered twice.
TEST(MergeLabels, MajorityAndTieBreak) {
  const TilePlan plan = plan_tiles(3, 1, 2, 1);
  ASSERT_EQ(plan.windows.size(), 2u);

  auto patch = [](std::uint8_t a, std::uint8_t b) {
    LabelMap m(1, 2);
    m.at(0, 0) = a;
    m.at(0, 1) = b;
    return m;
  };

  // agreeing votes pass through
  LabelMap merged = merge_labels(plan, {patch(0, 2), patch(2, 1)}, 3);
  EXPECT_EQ(merged.at(0, 1), 2);

  // a 1-1 tie goes to the smaller category id
  merged = merge_labels(plan, {patch(0, 2), patch(1, 1)}, 3);
  EXPECT_EQ(merged.at(0, 1), 1);
  merged = merge_labels(plan, {patch(0, 1), patch(2, 1)}, 3);
  EXPECT_EQ(merged.at(0, 1), 1);

  // ignore loses to any real vote, wins only when alone
  merged = merge_labels(plan, {patch(0, LabelMap::kIgnore), patch(2, 1)}, 3);
  EXPECT_EQ(merged.at(0, 1), 2);
  merged = merge_labels(plan, {patch(0, LabelMap::kIgnore), patch(LabelMap::kIgnore, 1)}, 3);
  EXPECT_EQ(merged.at(0, 1), LabelMap::kIgnore);
}

TEST(MergeLabels, Validation) {
  const TilePlan plan = plan_tiles(3, 1, 2, 1);
  std::vector<LabelMap> patches{LabelMap(1, 2), LabelMap(1, 2)};
  EXPECT_THROW(merge_labels(plan, {LabelMap(1, 2)}, 3), std::invalid_argument);
  EXPECT_THROW(merge_labels(plan, {LabelMap(1, 2), LabelMap(2, 2)}, 3), std::invalid_argument);
  EXPECT_THROW(merge_labels(plan, patches, 0), std::invalid_argument);
  EXPECT_THROW(merge_labels(plan, patches, 255), std::invalid_argument);
  std::vector<LabelMap> bad = patches;
  bad[0].at(0, 0) = 7;
  EXPECT_THROW(merge_labels(plan, bad, 3), std::invalid_argument);

  TilePlan holey = plan;
  holey.image_width = 4;  // windows stop at x=3
  EXPECT_THROW(merge_labels(holey, patches, 3), std::invalid_argument);
}

TEST(MergeLogits, OverlapAverages) {
  const TilePlan plan = plan_tiles(3, 1, 2, 1);
  TensorD a({1, 1, 2}, std::vector<double>{1.0, 3.0});
  TensorD b({1, 1, 2}, std::vector<double>{5.0, 7.0});
  const TensorD merged = merge_logits(plan, std::vector<TensorD>{a, b});
  ASSERT_EQ(merged.channels(), 1);
  EXPECT_EQ(merged.at(0, 0, 0), 1.0);
  EXPECT_EQ(merged.at(0, 0, 1), 4.0);  // (3 + 5) / 2
  EXPECT_EQ(merged.at(0, 0, 2), 7.0);
}

TEST(MergeLogits, CropThenMergeIsIdentity) {
  SeededRng rng(72);
  for (int trial = 0; trial < 20; ++trial) {
    const int h = 1 + static_cast<int>(rng.below(24));
    const int w = 1 + static_cast<int>(rng.below(24));
    const int patch = 1 + static_cast<int>(rng.below(8));
    const int overlap = static_cast<int>(rng.below(static_cast<std::uint32_t>(patch)));
    const int C = 1 + static_cast<int>(rng.below(3));
    TensorD src({static_cast<std::uint32_t>(C), static_cast<std::uint32_t>(h),
                 static_cast<std::uint32_t>(w)});
    for (double& v : src.data) v = rng.uniform01();
    const TilePlan plan = plan_tiles(w, h, patch, overlap);
    std::vector<TensorD> patches;
    for (const TileWindow& win : plan.windows) {
      TensorD t({static_cast<std::uint32_t>(C), static_cast<std::uint32_t>(win.height),
                 static_cast<std::uint32_t>(win.width)});
      for (int c = 0; c < C; ++c)
        for (int y = 0; y < win.height; ++y)
          for (int x = 0; x < win.width; ++x)
            t.at(c, y, x) = src.at(c, win.y0 + y, win.x0 + x);
      patches.push_back(std::move(t));
    }
    const TensorD merged = merge_logits(plan, patches);
    for (std::size_t i = 0; i < src.data.size(); ++i)
      ASSERT_NEAR(merged.data[i], src.data[i], 1e-12) << "trial " << trial;
  }
}

// merging must not care how the window list is ordered, down to the
// last bit
TEST(MergeLogits, PatchOrderIsIrrelevant) {
  SeededRng rng(73);
  const TilePlan plan = plan_tiles(11, 9, 4, 2);
  std::vector<TensorD> patches;
  for (const TileWindow& win : plan.windows) {
    TensorD t({2, static_cast<std::uint32_t>(win.height), static_cast<std::uint32_t>(win.width)});
    for (double& v : t.data) v = 20.0 * rng.uniform01() - 10.0;
    patches.push_back(std::move(t));
  }
  const TensorD base = merge_logits(plan, patches);

  std::vector<std::size_t> perm(plan.windows.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (int trial = 0; trial < 5; ++trial) {
    for (std::size_t i = perm.size() - 1; i > 0; --i)
      std::swap(perm[i], perm[rng.below(static_cast<std::uint32_t>(i + 1))]);
    TilePlan shuffled = plan;
    std::vector<TensorD> shuffled_patches;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      shuffled.windows[i] = plan.windows[perm[i]];
      shuffled_patches.push_back(patches[perm[i]]);
    }
    const TensorD merged = merge_logits(shuffled, shuffled_patches);
    ASSERT_EQ(merged.data.size(), base.data.size());
    EXPECT_EQ(std::memcmp(merged.data.data(), base.data.data(),
                          base.data.size() * sizeof(double)),
              0)
        << "trial " << trial;
  }
}

TEST(MergeLogits, Validation) {
  const TilePlan plan = plan_tiles(3, 1, 2, 1);
  TensorD ok({1, 1, 2}, 0.0);
  EXPECT_THROW(merge_logits(plan, std::vector<TensorD>{}), std::invalid_argument);
  EXPECT_THROW(merge_logits(plan, std::vector<TensorD>{ok}), std::invalid_argument);
  TensorD wrong_c({2, 1, 2}, 0.0);
  EXPECT_THROW(merge_logits(plan, std::vector<TensorD>{ok, wrong_c}), std::invalid_argument);
  TensorD wrong_w({1, 1, 3}, 0.0);
  EXPECT_THROW(merge_logits(plan, std::vector<TensorD>{ok, wrong_w}), std::invalid_argument);
  TilePlan holey = plan;
  holey.image_width = 4;
  EXPECT_THROW(merge_logits(holey, std::vector<TensorD>{ok, ok}), std::invalid_argument);
}
