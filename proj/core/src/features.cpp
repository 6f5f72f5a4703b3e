#include "docconf/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fmt/format.h>

#include "docconf/error.hpp"

namespace docconf {

std::array<FeatureRange, kNumFeatures> FeatureConfig::default_ranges() {
  std::array<FeatureRange, kNumFeatures> r{};
  r.fill(FeatureRange{0.0, 1.0});
  r[2] = FeatureRange{0.0, 5.0};
  return r;
}

void FeatureConfig::validate() const {
  if (bins < 1) throw InvalidArgument("feature histogram needs at least one bin");
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    if (!(ranges[f].lo < ranges[f].hi)) {
      throw InvalidArgument("feature " + std::to_string(f + 1) + " range must satisfy lo < hi");
    }
  }
}

std::string FeatureConfig::fingerprint() const {
  std::string s = fmt::format("bins={};normalize={};ranges=", bins, normalize ? 1 : 0);
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    s += fmt::format("{}{}:{}", f == 0 ? "" : ",", ranges[f].lo, ranges[f].hi);
  }
  return s;
}

FeatureLists object_feature_values(const Prediction& p) {
  FeatureLists lists;
  if (p.height < 1 || p.width < 1) throw InvalidArgument("prediction has no image dimensions");
  const double ih = p.height, iw = p.width, iarea = ih * iw;
  for (const auto& o : p.objects) {
    const double bh = o.bbox.height(), bw = o.bbox.width(), barea = bh * bw;
    const double parea = polygon_area(o.polygon);
    lists[0].push_back(bh / ih);
    lists[1].push_back(bw / iw);
    lists[2].push_back(bh / bw);
    lists[3].push_back(parea / iarea);
    lists[4].push_back(parea / barea);
    lists[5].push_back(barea / iarea);
  }
  for (std::size_t i = 0; i < p.objects.size(); ++i) {
    const Point a = rect_centroid(p.objects[i].bbox);
    for (std::size_t j = i + 1; j < p.objects.size(); ++j) {
      const Point b = rect_centroid(p.objects[j].bbox);
      lists[6].push_back(std::abs(a.y - b.y) / ih);
      lists[7].push_back(std::abs(a.x - b.x) / iw);
    }
  }
  return lists;
}

int bin_index(double value, const FeatureRange& range, int bins) {
  const double width = range.hi - range.lo;
  if (!(value > range.lo)) return 0;
  if (value >= range.hi) return bins - 1;
  int k = static_cast<int>(std::floor((value - range.lo) / width * bins));
  k = std::clamp(k, 0, bins - 1);
  // Correct for rounding so that boundary values land in the upper bin.
  while (k + 1 < bins && value >= range.lo + (k + 1) * width / bins) ++k;
  while (k > 0 && value < range.lo + k * width / bins) --k;
  return k;
}

FeatureVector feature_histogram_vector(const FeatureLists& lists, const FeatureConfig& cfg,
                                       std::string image_id) {
  cfg.validate();
  FeatureVector v{std::move(image_id), std::vector<double>(cfg.vector_length(), 0.0)};
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    double* hist = v.values.data() + f * static_cast<std::size_t>(cfg.bins);
    for (double x : lists[f]) hist[bin_index(x, cfg.ranges[f], cfg.bins)] += 1.0;
    if (cfg.normalize && !lists[f].empty()) {
      const double n = static_cast<double>(lists[f].size());
      for (int b = 0; b < cfg.bins; ++b) hist[b] /= n;
    }
  }
  return v;
}

}  // namespace docconf
