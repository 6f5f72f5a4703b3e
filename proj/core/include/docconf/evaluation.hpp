#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "docconf/estimators.hpp"
#include "docconf/metrics.hpp"

namespace docconf {

enum class CurveMetric { Map, PixelIou };

struct RejectPoint {
  double threshold = 0.0;
  double rejection_rate = 0.0;
  double metric = 0.0;
  std::size_t n_remaining = 0;
};

struct RejectCurve {
  std::string estimator;
  bool higher_is_confident = true;
  /// Ordered along the rejection direction; thresholds that would empty the
  /// set are omitted.
  std::vector<RejectPoint> points;
};

struct CurveBand {
  std::vector<double> rejection_rate;
  std::vector<double> p10;
  std::vector<double> median;
  std::vector<double> p90;
  /// Number of curves reaching each grid point.
  std::vector<std::size_t> n_curves;
};

/// 0, 0.05, ..., 1 (used for DAP, PCE and mAP-RFR).
std::vector<double> unit_threshold_grid();
/// 10, 9, ..., 0 (used for DOV).
std::vector<double> dov_threshold_grid();
std::vector<double> default_threshold_grid(Estimator e);
/// Every distinct score value; a curve on this grid visits every reachable
/// rejection level.
std::vector<double> rank_threshold_grid(const std::vector<ConfidenceScore>& scores);
/// "lo:hi:step" (step may be negative), or one of "dap", "dov", "unit".
std::vector<double> parse_threshold_grid(const std::string& spec);

/// 0, step, ..., 1 with step = 1 / divisions.
std::vector<double> rejection_grid(int divisions = 100);

/// Reject curve over aligned arrays. An image is removed when its confidence
/// is strictly below the threshold (strictly above when !higher_is_confident).
std::vector<RejectPoint> reject_points(const std::vector<double>& confidence,
                                       const std::vector<double>& metric,
                                       bool higher_is_confident, std::vector<double> grid);

/// Joins scores with image scores by image_id (InvalidArgument on any
/// mismatch) and sweeps the grid.
RejectCurve reject_curve(const std::vector<ConfidenceScore>& scores,
                         const std::vector<ImageScore>& image_scores,
                         const std::vector<double>& grid, CurveMetric metric = CurveMetric::Map);

/// Step interpolation onto a rejection grid. The full set (rate 0) is an
/// implicit first point; grid rate g takes the metric of the first curve point
/// whose rate is >= g. Grid rates past the curve's last point are undefined.
std::vector<std::optional<double>> interpolate_curve(const std::vector<RejectPoint>& points,
                                                     double full_set_metric,
                                                     const std::vector<double>& grid);

/// Median and 10th/90th percentiles of `n_resamples` reject curves computed
/// on resamples drawn with replacement. Resample r draws from a stream seeded
/// by (seed, r).
CurveBand bootstrap_band(const std::vector<ConfidenceScore>& scores,
                         const std::vector<ImageScore>& image_scores,
                         const std::vector<double>& grid, int n_resamples, std::uint64_t seed,
                         CurveMetric metric = CurveMetric::Map, int grid_divisions = 100);

/// Metric of the remaining images after removing them in uniformly random
/// order; at rate g the first ceil(g * n) images of the ordering are removed.
CurveBand random_baseline(const std::vector<ImageScore>& image_scores, int n_orderings,
                          std::uint64_t seed, CurveMetric metric = CurveMetric::Map,
                          int grid_divisions = 100);

/// Trapezoidal area under the curve points on the rejection-rate axis.
double area_under_curve(const std::vector<RejectPoint>& points);

}  // namespace docconf
