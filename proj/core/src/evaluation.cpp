#include "docconf/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "docconf/error.hpp"
#include "docconf/rng.hpp"
#include "docconf/stats.hpp"

namespace docconf {

std::vector<double> unit_threshold_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 20; ++i) g.push_back(i / 20.0);
  return g;
}

std::vector<double> dov_threshold_grid() {
  std::vector<double> g;
  for (int t = 10; t >= 0; --t) g.push_back(t);
  return g;
}

std::vector<double> default_threshold_grid(Estimator e) {
  return e == Estimator::Dov ? dov_threshold_grid() : unit_threshold_grid();
}

std::vector<double> rank_threshold_grid(const std::vector<ConfidenceScore>& scores) {
  std::vector<double> g;
  for (const auto& s : scores) g.push_back(s.value);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

std::vector<double> parse_threshold_grid(const std::string& spec) {
  if (spec == "dap" || spec == "unit" || spec == "pce" || spec == "map-rfr") return unit_threshold_grid();
  if (spec == "dov") return dov_threshold_grid();
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw InvalidArgument("bad threshold grid '" + spec + "': expected lo:hi:step");
    }
  }
  if (parts.size() != 3) throw InvalidArgument("bad threshold grid '" + spec + "': expected lo:hi:step");
  const double lo = parts[0], hi = parts[1], step = parts[2];
  if (step == 0.0 || (hi - lo) / step < 0.0) {
    throw InvalidArgument("threshold grid step does not move from lo to hi");
  }
  const auto n = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
  if (n > 1000000) throw InvalidArgument("threshold grid too large");
  std::vector<double> g;
  for (long long i = 0; i <= n; ++i) g.push_back(lo + static_cast<double>(i) * step);
  return g;
}

std::vector<double> rejection_grid(int divisions) {
  if (divisions < 1) throw InvalidArgument("rejection grid needs at least one division");
  std::vector<double> g;
  for (int i = 0; i <= divisions; ++i) g.push_back(static_cast<double>(i) / divisions);
  return g;
}

std::vector<RejectPoint> reject_points(const std::vector<double>& confidence,
                                       const std::vector<double>& metric,
                                       bool higher_is_confident, std::vector<double> grid) {
  if (confidence.size() != metric.size()) throw LengthMismatch("confidence/metric size mismatch");
  if (grid.empty()) throw InvalidArgument("threshold grid is empty");
  if (higher_is_confident) {
    std::sort(grid.begin(), grid.end());
  } else {
    std::sort(grid.begin(), grid.end(), std::greater<>());
  }
  const std::size_t n = confidence.size();
  std::vector<RejectPoint> out;
  for (double t : grid) {
    double sum = 0.0;
    std::size_t kept = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool removed = higher_is_confident ? confidence[i] < t : confidence[i] > t;
      if (removed) continue;
      sum += metric[i];
      ++kept;
    }
    if (kept == 0) continue;
    out.push_back(RejectPoint{t, static_cast<double>(n - kept) / static_cast<double>(n),
                              sum / static_cast<double>(kept), kept});
  }
  return out;
}

namespace {

struct Aligned {
  std::vector<double> confidence;
  std::vector<double> metric;
  bool higher_is_confident = true;
  std::string estimator;
};

double pick(const ImageScore& s, CurveMetric m) { return m == CurveMetric::Map ? s.map : s.pixel_iou; }

Aligned align(const std::vector<ConfidenceScore>& scores, const std::vector<ImageScore>& image_scores,
              CurveMetric metric) {
  if (scores.empty()) throw InvalidArgument("no confidence scores");
  std::map<std::string, const ImageScore*> by_id;
  for (const auto& s : image_scores) by_id[s.image_id] = &s;
  std::map<std::string, bool> seen;
  Aligned a;
  a.higher_is_confident = scores.front().higher_is_confident;
  a.estimator = std::string(to_string(scores.front().estimator));
  std::string missing;
  for (const auto& s : scores) {
    seen[s.image_id] = true;
    if (s.higher_is_confident != a.higher_is_confident) {
      throw InvalidArgument("confidence scores mix rejection directions");
    }
    auto it = by_id.find(s.image_id);
    if (it == by_id.end()) {
      missing += (missing.empty() ? "" : ", ") + s.image_id;
      continue;
    }
    a.confidence.push_back(s.value);
    a.metric.push_back(pick(*it->second, metric));
  }
  for (const auto& s : image_scores) {
    if (!seen.count(s.image_id)) missing += (missing.empty() ? "" : ", ") + s.image_id;
  }
  if (!missing.empty()) throw InvalidArgument("image ids without a counterpart: " + missing);
  return a;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

CurveBand summarize(const std::vector<double>& grid,
                    const std::vector<std::vector<double>>& values_per_point) {
  CurveBand band;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto& vals = values_per_point[g];
    if (vals.empty()) continue;
    band.rejection_rate.push_back(grid[g]);
    band.p10.push_back(percentile_nearest_rank(vals, 0.10));
    band.median.push_back(percentile_nearest_rank(vals, 0.50));
    band.p90.push_back(percentile_nearest_rank(vals, 0.90));
    band.n_curves.push_back(vals.size());
  }
  return band;
}

}  // namespace

RejectCurve reject_curve(const std::vector<ConfidenceScore>& scores,
                         const std::vector<ImageScore>& image_scores,
                         const std::vector<double>& grid, CurveMetric metric) {
  const Aligned a = align(scores, image_scores, metric);
  return RejectCurve{a.estimator, a.higher_is_confident,
                     reject_points(a.confidence, a.metric, a.higher_is_confident, grid)};
}

std::vector<std::optional<double>> interpolate_curve(const std::vector<RejectPoint>& points,
                                                     double full_set_metric,
                                                     const std::vector<double>& grid) {
  std::vector<std::pair<double, double>> pts{{0.0, full_set_metric}};
  for (const auto& p : points) pts.emplace_back(p.rejection_rate, p.metric);
  std::stable_sort(pts.begin(), pts.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::optional<double>> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto it = std::lower_bound(pts.begin(), pts.end(), grid[i],
                               [](const auto& p, double g) { return p.first < g; });
    if (it != pts.end()) out[i] = it->second;
  }
  return out;
}

CurveBand bootstrap_band(const std::vector<ConfidenceScore>& scores,
                         const std::vector<ImageScore>& image_scores,
                         const std::vector<double>& grid, int n_resamples, std::uint64_t seed,
                         CurveMetric metric, int grid_divisions) {
  if (n_resamples < 1) throw InvalidArgument("bootstrap needs at least one resample");
  const Aligned a = align(scores, image_scores, metric);
  const std::size_t n = a.confidence.size();
  const auto rgrid = rejection_grid(grid_divisions);
  std::vector<std::vector<double>> values(rgrid.size());
  std::vector<double> conf(n), met(n);
  for (int r = 0; r < n_resamples; ++r) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(r)}));
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(rng.below(n));
      conf[i] = a.confidence[k];
      met[i] = a.metric[k];
    }
    const auto pts = reject_points(conf, met, a.higher_is_confident, grid);
    const auto interp = interpolate_curve(pts, mean_of(met), rgrid);
    for (std::size_t g = 0; g < rgrid.size(); ++g) {
      if (interp[g]) values[g].push_back(*interp[g]);
    }
  }
  return summarize(rgrid, values);
}

CurveBand random_baseline(const std::vector<ImageScore>& image_scores, int n_orderings,
                          std::uint64_t seed, CurveMetric metric, int grid_divisions) {
  if (image_scores.empty()) throw InvalidArgument("random baseline needs at least one image");
  if (n_orderings < 1) throw InvalidArgument("random baseline needs at least one ordering");
  const std::size_t n = image_scores.size();
  const auto rgrid = rejection_grid(grid_divisions);
  std::vector<std::vector<double>> values(rgrid.size());
  std::vector<std::size_t> order(n), kept;
  for (int o = 0; o < n_orderings; ++o) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(o)}));
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    for (std::size_t g = 0; g < rgrid.size(); ++g) {
      const auto removed = static_cast<std::size_t>(std::ceil(rgrid[g] * static_cast<double>(n) - 1e-9));
      if (removed >= n) continue;
      kept.assign(order.begin() + static_cast<std::ptrdiff_t>(removed), order.end());
      // Index order so that rate 0 reproduces the full-set mean bit for bit.
      std::sort(kept.begin(), kept.end());
      double sum = 0.0;
      for (std::size_t i : kept) sum += pick(image_scores[i], metric);
      values[g].push_back(sum / static_cast<double>(kept.size()));
    }
  }
  return summarize(rgrid, values);
}

double area_under_curve(const std::vector<RejectPoint>& points) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : points) pts.emplace_back(p.rejection_rate, p.metric);
  std::stable_sort(pts.begin(), pts.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    area += (pts[i].first - pts[i - 1].first) * (pts[i].second + pts[i - 1].second) / 2.0;
  }
  return area;
}

}  // namespace docconf
