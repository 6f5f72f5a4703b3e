#pragma once

#include <string>
#include <vector>

#include "docconf/geometry.hpp"

namespace docconf {

/// Per-pixel object-class probability for one image, row-major.
class ProbabilityMap {
 public:
  ProbabilityMap() = default;
  /// Throws InvalidArgument if values.size() != height * width or any value
  /// lies outside [0, 1].
  ProbabilityMap(int height, int width, std::vector<float> values);
  /// All-zero map.
  ProbabilityMap(int height, int width);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  float at(int row, int col) const noexcept {
    return values_[static_cast<std::size_t>(row) * width_ + col];
  }
  void set(int row, int col, float v);
  const std::vector<float>& values() const noexcept { return values_; }

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<float> values_;
};

struct DetectedObject {
  Polygon polygon;
  Rect bbox;
  long long pixel_area = 0;
  double mean_prob = 1.0;
};

struct Prediction {
  std::string image_id;
  int height = 0;
  int width = 0;
  std::vector<DetectedObject> objects;
};

struct PostprocessConfig {
  double binarize_threshold = 0.5;
  int connectivity = 8;
  /// Components with fewer pixels are dropped (t = 50).
  long long min_area_px = 50;

  /// Throws InvalidArgument when out of range.
  void validate() const;
};

/// Pixel set iff probability >= threshold.
BinaryMask binarize(const ProbabilityMap& m, const PostprocessConfig& cfg);

/// Maximal connected components of the set pixels. Each component lists its
/// pixel indices (row * width + col) in ascending order; components are ordered
/// by their first pixel in row-major order.
std::vector<std::vector<int>> connected_components(const BinaryMask& m, int connectivity);

/// Outer border of a pixel set, traced clockwise with Moore-neighbour
/// following from the top-left-most pixel. Vertices are pixel centers.
/// `pixels` must be a non-empty list of indices into a height x width grid.
std::vector<Point> trace_outer_border(const std::vector<int>& pixels, int height, int width);

/// binarize -> connected components -> area filter -> contour, bbox, pixel
/// area and mean probability per surviving component.
///
/// Components of one or two pixels have no valid bounding polygon and are
/// always filtered, so the effective minimum area is max(min_area_px, 3).
Prediction extract_objects(const ProbabilityMap& m, const PostprocessConfig& cfg,
                           std::string image_id = {});

}  // namespace docconf
