#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "docconf/estimators.hpp"
#include "docconf/metrics.hpp"
#include "docconf/postprocess.hpp"

namespace docconf {

/// Relative weights of the four corruption mechanisms. Each mechanism's
/// strength is weight * severity.
struct ErrorMixture {
  double jitter = 1.0;
  double fragmentation = 1.0;
  double miss = 0.35;
  double spurious = 1.0;
};

/// Stand-in for a detector being fine-tuned: quality grows with the
/// (difficulty-weighted) number of labelled images, and each image is
/// corrupted with severity difficulty * (1 - quality).
struct SyntheticDetectorConfig {
  double q_min = 0.2;
  double q_max = 0.9;
  double kappa = 40.0;

  /// difficulty = lo + (hi - lo) * u^shape, u uniform.
  double difficulty_lo = 0.0;
  double difficulty_hi = 1.0;
  double difficulty_shape = 2.0;
  /// A labelled image of normalized difficulty d adds (g + 1) d^g to the
  /// effective label count (mean 1 for uniform d). g = 0 makes quality depend
  /// on the plain count.
  double informativeness_exponent = 2.0;

  ErrorMixture mixture;
  /// Ensemble members are corrupted at severity * dropout_noise_scale.
  double dropout_noise_scale = 1.0;

  int image_height = 96;
  int image_width = 72;
  int max_jitter_px = 3;
  double max_spurious_rate = 6.0;
  int max_gap_px = 3;

  std::uint64_t seed = 0;

  void validate() const;
  double quality(double effective_labels) const;
  double severity(double difficulty, double quality) const;
  double informativeness(double difficulty) const;
};

struct SyntheticImage {
  GroundTruth gt;
  double difficulty = 0.0;
};

/// Page-like (one or two skewed quadrilaterals) and line-like (several thin
/// bands) layouts, objects separated by at least two background pixels and
/// each at least 50 pixels large. Image k uses stream (seed, k).
std::vector<SyntheticImage> generate_corpus(std::size_t n, const SyntheticDetectorConfig& cfg,
                                            std::uint64_t seed, const std::string& id_prefix = "img");

/// Synthetic detector output for `gt` at `severity` in [0, 1]. Severity 0
/// paints the rasterized ground truth with probability 1 on a zero
/// background.
ProbabilityMap perturb_map(const GroundTruth& gt, double severity, const ErrorMixture& mixture,
                           const SyntheticDetectorConfig& cfg, std::uint64_t seed);

Prediction perturb_prediction(const GroundTruth& gt, double severity, const ErrorMixture& mixture,
                              const SyntheticDetectorConfig& cfg, std::uint64_t seed,
                              const PostprocessConfig& post = {});

/// N members, member k drawn from stream (seed, k) at severity * dropout_noise_scale.
std::vector<ProbabilityMap> perturb_ensemble_maps(const GroundTruth& gt, double severity,
                                                  const SyntheticDetectorConfig& cfg,
                                                  std::uint64_t seed, std::size_t n);

DropoutEnsemble perturb_ensemble(const GroundTruth& gt, double severity,
                                 const SyntheticDetectorConfig& cfg, std::uint64_t seed,
                                 std::size_t n, const PostprocessConfig& post = {});

}  // namespace docconf
