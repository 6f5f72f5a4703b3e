#pragma once

#include <string>
#include <vector>

#include "docconf/geometry.hpp"
#include "docconf/postprocess.hpp"

namespace docconf {

struct GroundTruth {
  std::string image_id;
  int height = 0;
  int width = 0;
  std::vector<Polygon> objects;
};

/// Treat a prediction as a reference (its probabilities are ignored).
GroundTruth as_reference(const Prediction& p);

struct MapConfig {
  /// Strictly increasing, each in (0, 1]. Default 0.50:0.05:0.95.
  std::vector<double> iou_thresholds = default_thresholds();

  static std::vector<double> default_thresholds();
  void validate() const;
};

struct ImageScore {
  std::string image_id;
  double pixel_iou = 0.0;
  double map = 0.0;
};

/// An object rasterized once inside its bounding rectangle, clipped to the
/// image.
struct ObjectMask {
  Rect box;
  BinaryMask bits;  // box.height() x box.width(), may be empty when clipped away
  long long count = 0;
};

ObjectMask rasterize_object(const Polygon& p, int height, int width);

/// Pixel IoU of two rasterized objects.
double object_iou(const ObjectMask& a, const ObjectMask& b);

/// Objects of one side of a comparison, rasterized and (for predictions)
/// ranked by confidence: mean_prob descending, then pixel_area descending,
/// then original order.
struct RankedObjects {
  int height = 0;
  int width = 0;
  std::vector<ObjectMask> masks;  // original object order
  std::vector<int> rank;          // rank[k] = index of the k-th most confident object
};

RankedObjects prepare_prediction(const Prediction& p);
RankedObjects prepare_reference(const GroundTruth& g);

/// iou[i][j] between prediction object i and reference object j (original
/// orders). Throws DimensionMismatch on differing image sizes.
std::vector<std::vector<double>> iou_matrix(const RankedObjects& pred, const RankedObjects& ref);

struct MatchResult {
  std::vector<std::pair<int, int>> true_positives;  // (pred index, ref index) in rank order
  std::vector<int> false_positives;                 // pred indices, rank order
  std::vector<int> false_negatives;                 // ref indices, ascending
  /// Per ranked prediction: true if it was a TP.
  std::vector<bool> ranked_is_tp;
};

/// Greedy one-to-one matching in confidence order: each prediction takes the
/// unmatched reference with the highest IoU (lowest index on ties) when that
/// IoU >= tau, and is a false positive otherwise.
MatchResult match_ranked(const RankedObjects& pred, const std::vector<std::vector<double>>& iou,
                         std::size_t n_ref, double tau);

MatchResult match_objects(const Prediction& pred, const GroundTruth& ref, double tau);

/// All-point interpolated AP from a ranked TP/FP sequence against n_ref
/// references: sum over k of (R_k - R_{k-1}) * max_{k' >= k} P_{k'}.
/// Both sides empty scores 1, exactly one empty scores 0.
double ap_from_ranked(const std::vector<bool>& ranked_is_tp, std::size_t n_ref);

double average_precision(const Prediction& pred, const GroundTruth& ref, double tau);

/// Mean of AP over cfg.iou_thresholds, reusing one IoU matrix.
double mean_average_precision(const RankedObjects& pred, const RankedObjects& ref,
                              const MapConfig& cfg);
double mean_average_precision(const Prediction& pred, const GroundTruth& ref,
                              const MapConfig& cfg = {});

/// IoU of the union of predicted pixels against the union of reference
/// pixels. 1 when both are empty, 0 when exactly one is.
double pixel_iou(const RankedObjects& pred, const RankedObjects& ref);
double pixel_iou(const Prediction& pred, const GroundTruth& ref);

ImageScore score_image(const Prediction& pred, const GroundTruth& ref, const MapConfig& cfg = {});

struct DatasetScores {
  std::vector<ImageScore> images;  // in prediction order
  double mean_pixel_iou = 0.0;
  double mean_map = 0.0;
};

/// Scores every prediction against the reference with the same image_id.
/// Throws InvalidArgument listing every id without a counterpart.
DatasetScores dataset_scores(const std::vector<Prediction>& preds,
                             const std::vector<GroundTruth>& refs, const MapConfig& cfg = {});

}  // namespace docconf
