#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "docconf/metrics.hpp"
#include "docconf/postprocess.hpp"

namespace docconf {

enum class Estimator { Pce, Dap, Dov, MapRfr };

std::string_view to_string(Estimator e) noexcept;
/// Accepts "pce", "dap", "dov", "map-rfr" (case-insensitive). Throws InvalidArgument.
Estimator parse_estimator(std::string_view s);

/// Whether larger values of this estimator mean a more trustworthy detection.
constexpr bool higher_is_confident(Estimator e) noexcept { return e != Estimator::Dov; }

struct ConfidenceScore {
  std::string image_id;
  Estimator estimator = Estimator::Pce;
  double value = 0.0;
  bool higher_is_confident = true;
  /// Set when the value comes from a convention rather than a measurement
  /// (PCE of an empty prediction).
  bool conventional = false;
};

/// N predictions of the same image obtained with dropout active.
struct DropoutEnsemble {
  std::string image_id;
  std::vector<Prediction> predictions;

  std::size_t n() const noexcept { return predictions.size(); }
};

inline constexpr std::size_t kDefaultEnsembleSize = 10;

/// Mean over objects of their mean probability; 0 for an empty prediction.
ConfidenceScore pce(const Prediction& p);

/// Mean of mAP(p_i, p_j) over all ordered pairs i != j, p_j acting as the
/// reference. Throws InsufficientEnsemble when n < 2, DimensionMismatch when
/// members differ in size.
ConfidenceScore dap(const DropoutEnsemble& e, const MapConfig& cfg = {});

/// Population variance of the per-member object counts.
ConfidenceScore dov(const DropoutEnsemble& e);

}  // namespace docconf
