#pragma once

#include <array>
#include <string>
#include <vector>

#include "docconf/postprocess.hpp"

namespace docconf {

inline constexpr std::size_t kNumFeatures = 8;

/// Per-object and per-pair descriptive statistics, in this order:
///   0  bbox height / image height
///   1  bbox width / image width
///   2  bbox height / bbox width
///   3  polygon area / image area
///   4  polygon area / bbox area
///   5  bbox area / image area
///   6  |centroid dy| / image height, one entry per unordered object pair
///   7  |centroid dx| / image width, one entry per unordered object pair
/// Polygon area is the shoelace area of the contour; bbox area uses inclusive
/// pixel extents.
using FeatureLists = std::array<std::vector<double>, kNumFeatures>;

struct FeatureRange {
  double lo = 0.0;
  double hi = 1.0;
};

struct FeatureConfig {
  int bins = 10;
  std::array<FeatureRange, kNumFeatures> ranges = default_ranges();
  bool normalize = true;

  /// [0,1] everywhere except the aspect ratio, which uses [0,5].
  static std::array<FeatureRange, kNumFeatures> default_ranges();
  void validate() const;
  std::size_t vector_length() const noexcept { return kNumFeatures * static_cast<std::size_t>(bins); }
  /// Stable textual description, stored with trained models and in CSV headers.
  std::string fingerprint() const;
};

struct FeatureVector {
  std::string image_id;
  std::vector<double> values;  // feature-major, kNumFeatures * bins
};

FeatureLists object_feature_values(const Prediction& p);

/// Bin index for `value` on [lo, hi] with `bins` equal-width bins. Bins are
/// half-open [b_k, b_{k+1}) except the last, which is closed; values outside
/// the range are clipped into the first or last bin.
int bin_index(double value, const FeatureRange& range, int bins);

FeatureVector feature_histogram_vector(const FeatureLists& lists, const FeatureConfig& cfg,
                                       std::string image_id = {});

inline FeatureVector feature_vector(const Prediction& p, const FeatureConfig& cfg) {
  return feature_histogram_vector(object_feature_values(p), cfg, p.image_id);
}

}  // namespace docconf
