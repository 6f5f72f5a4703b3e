#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "docconf/estimators.hpp"
#include "docconf/features.hpp"
#include "docconf/forest.hpp"
#include "docconf/metrics.hpp"
#include "docconf/synthetic.hpp"

namespace docconf {

/// Either "confidence strictly below threshold" (strictly above for
/// lower-is-confident scores) or "the budget least-confident images".
struct SelectionPolicy {
  enum class Kind { Threshold, Budget };
  Kind kind = Kind::Budget;
  double threshold = 0.0;
  std::size_t budget = 0;

  static SelectionPolicy with_threshold(double t) { return {Kind::Threshold, t, 0}; }
  static SelectionPolicy with_budget(std::size_t k) { return {Kind::Budget, 0.0, k}; }
  /// "threshold:<t>" or "budget:<k>".
  static SelectionPolicy parse(const std::string& s);
  std::string to_string() const;
};

struct Selection {
  std::vector<std::string> ids;  // least confident first
  /// The budget exceeded the pool; the whole pool was returned.
  bool truncated = false;
};

/// Ties are broken by image_id in lexicographic order. Throws InvalidArgument
/// on an empty pool.
Selection select(const std::vector<ConfidenceScore>& scores, const SelectionPolicy& policy);

/// Selection signals available to the simulation. Oracle uses the true mAP
/// of each prediction; Random draws a uniform score.
enum class AlEstimator { Pce, Dap, Dov, MapRfr, Oracle, Random };

std::string_view to_string(AlEstimator e) noexcept;
AlEstimator parse_al_estimator(std::string_view s);

struct SimulationConfig {
  SyntheticDetectorConfig detector;
  std::size_t pool_size = 200;
  std::size_t test_size = 100;
  AlEstimator estimator = AlEstimator::Dap;
  SelectionPolicy policy = SelectionPolicy::with_budget(10);
  int iterations = 10;
  std::size_t ensemble_size = kDefaultEnsembleSize;
  MapConfig map;
  PostprocessConfig postprocess;
  FeatureConfig features;
  ForestParams forest;
  /// Images used to train the regressor for AlEstimator::MapRfr.
  std::size_t rfr_train_size = 150;
  std::uint64_t seed = 0;

  void validate() const;
};

struct IterationLog {
  int iteration = 0;
  std::string estimator;
  std::string policy;
  std::size_t n_selected = 0;
  std::size_t cumulative_images = 0;
  double quality = 0.0;
  double test_iou = 0.0;
  double test_map = 0.0;
  std::vector<std::string> selected;
};

struct PoolState {
  std::vector<std::string> labeled;
  std::vector<std::string> unlabeled;
  int iteration = 0;
  /// Row 0 is the baseline before any annotation.
  std::vector<IterationLog> log;
};

/// Scores, selects and labels for cfg.iterations rounds. Pool images are
/// re-predicted every round from stream (seed, iteration, image id); test
/// images use stream (seed, image id) so that the test metric only moves when
/// the detector quality does.
PoolState simulate(const std::vector<SyntheticImage>& pool, const std::vector<SyntheticImage>& test,
                   const SimulationConfig& cfg);

/// Generates pool and test corpora from cfg.seed and runs simulate().
PoolState simulate(const SimulationConfig& cfg);

/// Regression rows (feature vector, true mAP) for a synthetic corpus, each
/// image predicted at its own difficulty with quality q.
RegressionDataset synthetic_regression_rows(const std::vector<SyntheticImage>& corpus, double quality,
                                            const SimulationConfig& cfg, std::uint64_t seed);

}  // namespace docconf
