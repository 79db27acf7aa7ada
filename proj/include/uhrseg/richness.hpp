#pragma once

// Scene context richness: a scalar summary of how varied annotated
// scenes are. Square regions are sampled from each label map; within a
// region every category contributes its instance count (4-connected
// components, small specks dropped) and its pixel fraction. With O_c
// the mean instance count and p_c the mean pixel fraction across all
// sampled regions,
//
//   R = -sum_c O_c^(1/q) * p_c * ln(p_c)
//
// and categories that never appear (p_c = 0) contribute nothing.
// R is invariant under any relabeling that permutes category ids.

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "uhrseg/core.hpp"
#include "uhrseg/tiler.hpp"

namespace uhrseg {

struct ComponentSet {
  int count = 0;                          // surviving components
  std::vector<std::int32_t> component_map;  // per pixel: component id or -1
};

/// 4-connected components of equal-label pixels. Ignore pixels and
/// components smaller than min_area map to -1 and are not counted.
inline ComponentSet label_components(const LabelMap& m, int categories, int min_area = 1) {
  if (categories < 1 || categories >= LabelMap::kIgnore)
    throw std::invalid_argument("label_components: category count out of range");
  if (min_area < 1) throw std::invalid_argument("label_components: min_area must be >= 1");
  ComponentSet set;
  set.component_map.assign(m.labels.size(), -1);
  std::vector<std::pair<int, int>> queue;
  std::vector<std::size_t> members;
  for (int sy = 0; sy < m.height; ++sy) {
    for (int sx = 0; sx < m.width; ++sx) {
      const std::size_t seed = static_cast<std::size_t>(sy) * m.width + sx;
      const std::uint8_t cat = m.labels[seed];
      if (cat == LabelMap::kIgnore || set.component_map[seed] != -1) continue;
      if (cat >= categories)
        throw std::invalid_argument("label_components: label " + std::to_string(cat) +
                                    " >= category count " + std::to_string(categories));
      const std::int32_t id = set.count;
      queue.clear();
      members.clear();
      queue.emplace_back(sy, sx);
      set.component_map[seed] = id;
      members.push_back(seed);
      while (!queue.empty()) {
        const auto [y, x] = queue.back();
        queue.pop_back();
        const int ny[4] = {y - 1, y + 1, y, y};
        const int nx[4] = {x, x, x - 1, x + 1};
        for (int k = 0; k < 4; ++k) {
          if (ny[k] < 0 || ny[k] >= m.height || nx[k] < 0 || nx[k] >= m.width) continue;
          const std::size_t idx = static_cast<std::size_t>(ny[k]) * m.width + nx[k];
          if (set.component_map[idx] != -1 || m.labels[idx] != cat) continue;
          set.component_map[idx] = id;
          members.push_back(idx);
          queue.emplace_back(ny[k], nx[k]);
        }
      }
      if (static_cast<int>(members.size()) < min_area) {
        for (std::size_t idx : members) set.component_map[idx] = -1;
      } else {
        ++set.count;
      }
    }
  }
  return set;
}

struct RegionStats {
  TileWindow region;
  std::vector<double> pixel_fraction;  // per category, of the region area
  std::vector<int> instance_count;     // per category
};

inline RegionStats region_stats(const LabelMap& m, const TileWindow& region, int categories,
                                int min_area = 1) {
  const LabelMap crop = crop_labels(m, region);
  const ComponentSet comps = label_components(crop, categories, min_area);
  RegionStats stats;
  stats.region = region;
  stats.pixel_fraction.assign(categories, 0.0);
  stats.instance_count.assign(categories, 0);
  const double area = static_cast<double>(crop.labels.size());
  for (std::uint8_t v : crop.labels)
    if (v != LabelMap::kIgnore) stats.pixel_fraction[v] += 1.0 / area;
  std::vector<std::int32_t> seen;
  for (std::size_t i = 0; i < crop.labels.size(); ++i) {
    const std::int32_t id = comps.component_map[i];
    if (id < 0) continue;
    if (static_cast<std::size_t>(id) >= seen.size()) seen.resize(id + 1, 0);
    if (seen[id]) continue;
    seen[id] = 1;
    ++stats.instance_count[crop.labels[i]];
  }
  return stats;
}

/// Random square regions clamped to the map; x is drawn before y.
inline std::vector<TileWindow> sample_regions(const LabelMap& m, int region_size, int count,
                                              SeededRng& rng) {
  if (region_size < 1) throw std::invalid_argument("sample_regions: region size must be >= 1");
  if (count < 1) throw std::invalid_argument("sample_regions: count must be >= 1");
  const int rw = std::min(region_size, m.width);
  const int rh = std::min(region_size, m.height);
  std::vector<TileWindow> regions;
  regions.reserve(count);
  for (int i = 0; i < count; ++i) {
    const int x0 = static_cast<int>(rng.below(static_cast<std::uint32_t>(m.width - rw + 1)));
    const int y0 = static_cast<int>(rng.below(static_cast<std::uint32_t>(m.height - rh + 1)));
    regions.push_back({x0, y0, rw, rh});
  }
  return regions;
}

struct CategoryRichness {
  int category = 0;
  double instances = 0;      // O_c: mean instance count per region
  double pixel_fraction = 0;  // p_c: mean pixel fraction per region
};

struct RichnessReport {
  double score = 0;
  double q = 2.0;
  std::size_t regions = 0;
  std::vector<CategoryRichness> categories;
};

inline RichnessReport richness_score(const std::vector<RegionStats>& stats, int categories,
                                     double q = 2.0) {
  if (stats.empty()) throw std::invalid_argument("richness_score: no regions");
  if (categories < 1) throw std::invalid_argument("richness_score: category count out of range");
  if (q <= 0) throw std::invalid_argument("richness_score: q must be > 0");
  RichnessReport report;
  report.q = q;
  report.regions = stats.size();
  report.categories.resize(categories);
  const double inv_n = 1.0 / static_cast<double>(stats.size());
  for (int c = 0; c < categories; ++c) {
    CategoryRichness& cr = report.categories[c];
    cr.category = c;
    for (const RegionStats& s : stats) {
      if (static_cast<int>(s.pixel_fraction.size()) != categories)
        throw std::invalid_argument("richness_score: region stats category count mismatch");
      cr.instances += s.instance_count[c] * inv_n;
      cr.pixel_fraction += s.pixel_fraction[c] * inv_n;
    }
    if (cr.pixel_fraction > 0)
      report.score -= std::pow(cr.instances, 1.0 / q) * cr.pixel_fraction *
                      std::log(cr.pixel_fraction);
  }
  return report;
}

}  // namespace uhrseg
