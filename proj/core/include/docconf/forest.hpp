#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "docconf/features.hpp"

namespace docconf {

struct ForestParams {
  int n_trees = 100;
  /// 0 means unlimited.
  int max_depth = 0;
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  /// Candidate features per split; 0 means all.
  int features_per_split = 0;
  bool bootstrap = true;
  std::uint64_t seed = 0;

  void validate() const;
};

struct RegressionRow {
  std::string image_id;
  std::vector<double> x;
  double target = 0.0;
};

using RegressionDataset = std::vector<RegressionRow>;

/// Flattened binary regression tree. Node 0 is the root; a leaf has
/// feature == -1.
struct RegressionTree {
  struct Node {
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;
  };
  std::vector<Node> nodes;

  /// Samples with x[feature] <= threshold go left.
  double predict(const std::vector<double>& x) const;
};

class ForestModel {
 public:
  ForestModel() = default;
  ForestModel(ForestParams params, FeatureConfig features, std::size_t n_inputs,
              std::vector<RegressionTree> trees, double target_min, double target_max);

  const ForestParams& params() const noexcept { return params_; }
  const FeatureConfig& feature_config() const noexcept { return features_; }
  std::size_t n_inputs() const noexcept { return n_inputs_; }
  const std::vector<RegressionTree>& trees() const noexcept { return trees_; }
  double target_min() const noexcept { return target_min_; }
  double target_max() const noexcept { return target_max_; }

  /// Out-of-bag MSE recorded at fit time; absent after load() or when no row
  /// was ever out of bag.
  std::optional<double> oob_mse() const noexcept { return oob_mse_; }
  void set_oob_mse(std::optional<double> v) noexcept { oob_mse_ = v; }

 private:
  ForestParams params_;
  FeatureConfig features_;
  std::size_t n_inputs_ = 0;
  std::vector<RegressionTree> trees_;
  double target_min_ = 0.0;
  double target_max_ = 0.0;
  std::optional<double> oob_mse_;
};

/// Grows params.n_trees CART trees (variance reduction, exhaustive midpoint
/// thresholds) on bootstrap resamples. Tree t draws from a stream seeded by
/// (params.seed, t), so the result does not depend on `jobs`.
ForestModel fit(const RegressionDataset& data, const ForestParams& params,
                const FeatureConfig& features = {}, int jobs = 1);

/// Mean of the per-tree leaf values. Throws LengthMismatch when x has the
/// wrong length.
double predict(const ForestModel& m, const std::vector<double>& x);
double predict(const ForestModel& m, const FeatureVector& x);

double mse(const ForestModel& m, const RegressionDataset& data);

/// Versioned little-endian binary encoding with a trailing checksum.
std::vector<std::uint8_t> serialize(const ForestModel& m);
ForestModel deserialize(const std::vector<std::uint8_t>& bytes);

void save(const ForestModel& m, const std::filesystem::path& path);
ForestModel load(const std::filesystem::path& path);

}  // namespace docconf
