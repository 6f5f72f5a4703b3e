#include "docconf/estimators.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <string>

#include "docconf/error.hpp"

namespace docconf {

std::string_view to_string(Estimator e) noexcept {
  switch (e) {
    case Estimator::Pce: return "pce";
    case Estimator::Dap: return "dap";
    case Estimator::Dov: return "dov";
    case Estimator::MapRfr: return "map-rfr";
  }
  return "?";
}

Estimator parse_estimator(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "pce") return Estimator::Pce;
  if (lower == "dap") return Estimator::Dap;
  if (lower == "dov") return Estimator::Dov;
  if (lower == "map-rfr" || lower == "map_rfr" || lower == "maprfr") return Estimator::MapRfr;
  throw InvalidArgument("unknown estimator '" + std::string(s) + "'");
}

ConfidenceScore pce(const Prediction& p) {
  ConfidenceScore s{p.image_id, Estimator::Pce, 0.0, true, false};
  if (p.objects.empty()) {
    s.conventional = true;
    return s;
  }
  double sum = 0.0;
  for (const auto& o : p.objects) sum += o.mean_prob;
  s.value = sum / static_cast<double>(p.objects.size());
  return s;
}

namespace {

void check_ensemble(const DropoutEnsemble& e) {
  if (e.n() < 2) {
    throw InsufficientEnsemble("ensemble '" + e.image_id + "' has " + std::to_string(e.n()) +
                               " member(s); at least 2 are required");
  }
  for (const auto& p : e.predictions) {
    if (p.height != e.predictions.front().height || p.width != e.predictions.front().width) {
      throw DimensionMismatch("ensemble '" + e.image_id + "' mixes image sizes");
    }
  }
}

}  // namespace

ConfidenceScore dap(const DropoutEnsemble& e, const MapConfig& cfg) {
  check_ensemble(e);
  cfg.validate();
  const std::size_t n = e.n();
  std::vector<RankedObjects> as_pred, as_ref;
  as_pred.reserve(n);
  as_ref.reserve(n);
  for (const auto& p : e.predictions) {
    as_pred.push_back(prepare_prediction(p));
    // Same rasterization, reference side keeps original order.
    RankedObjects r = as_pred.back();
    std::iota(r.rank.begin(), r.rank.end(), 0);
    as_ref.push_back(std::move(r));
  }
  // Fixed index order keeps the sum bitwise reproducible.
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      sum += mean_average_precision(as_pred[i], as_ref[j], cfg);
    }
  }
  const double pairs = static_cast<double>(n * n - n);
  return ConfidenceScore{e.image_id, Estimator::Dap, sum / pairs, true, false};
}

ConfidenceScore dov(const DropoutEnsemble& e) {
  check_ensemble(e);
  const double n = static_cast<double>(e.n());
  double mean = 0.0;
  for (const auto& p : e.predictions) mean += static_cast<double>(p.objects.size());
  mean /= n;
  double var = 0.0;
  for (const auto& p : e.predictions) {
    const double d = static_cast<double>(p.objects.size()) - mean;
    var += d * d;
  }
  return ConfidenceScore{e.image_id, Estimator::Dov, var / n, false, false};
}

}  // namespace docconf
