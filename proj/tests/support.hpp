#pragma once

// Independent oracles and scene generators shared by the unit and acceptance
// suites. Nothing here calls the library's rasterizer, matcher or AP code.

#include <docconf/estimators.hpp>
#include <docconf/forest.hpp>
#include <docconf/geometry.hpp>
#include <docconf/metrics.hpp>
#include <docconf/postprocess.hpp>
#include <docconf/rng.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace oracle {

/// Integer rectangle covering pixel centres x0..x1, y0..y1.
struct Box {
  int x0, y0, x1, y1;
  long long area() const { return static_cast<long long>(x1 - x0 + 1) * (y1 - y0 + 1); }
};

inline docconf::Polygon box_polygon(const Box& b) {
  return docconf::Polygon({{double(b.x0), double(b.y0)},
                           {double(b.x1), double(b.y0)},
                           {double(b.x1), double(b.y1)},
                           {double(b.x0), double(b.y1)}});
}

inline long long overlap(const Box& a, const Box& b) {
  const int w = std::min(a.x1, b.x1) - std::max(a.x0, b.x0) + 1;
  const int h = std::min(a.y1, b.y1) - std::max(a.y0, b.y0) + 1;
  return w > 0 && h > 0 ? static_cast<long long>(w) * h : 0;
}

inline double box_iou(const Box& a, const Box& b) {
  const long long i = overlap(a, b);
  return static_cast<double>(i) / static_cast<double>(a.area() + b.area() - i);
}

struct ScoredBox {
  Box box;
  double prob;
};

struct Scene {
  int height = 40;
  int width = 40;
  std::vector<ScoredBox> preds;
  std::vector<Box> refs;
};

inline docconf::Prediction to_prediction(const Scene& s, const std::string& id = "scene") {
  docconf::Prediction p{id, s.height, s.width, {}};
  for (const auto& sb : s.preds) {
    p.objects.push_back({box_polygon(sb.box), docconf::make_rect(sb.box.x0, sb.box.y0, sb.box.x1, sb.box.y1),
                         sb.box.area(), sb.prob});
  }
  return p;
}

inline docconf::GroundTruth to_ground_truth(const Scene& s, const std::string& id = "scene") {
  docconf::GroundTruth g{id, s.height, s.width, {}};
  for (const auto& b : s.refs) g.objects.push_back(box_polygon(b));
  return g;
}

inline Box random_box(docconf::Rng& rng, int height, int width, int min_side = 2, int max_side = 14) {
  const int w = static_cast<int>(rng.between(min_side, max_side));
  const int h = static_cast<int>(rng.between(min_side, max_side));
  const int x0 = static_cast<int>(rng.between(0, width - w));
  const int y0 = static_cast<int>(rng.between(0, height - h));
  return {x0, y0, x0 + w - 1, y0 + h - 1};
}

/// Up to `max_objects` per side. Predictions are mostly shifted or resized
/// copies of references so every IoU regime is exercised; probabilities come
/// from a small set so ties in the ranking are common.
inline Scene random_scene(docconf::Rng& rng, int max_objects = 5) {
  Scene s;
  const auto n_ref = static_cast<int>(rng.between(0, max_objects));
  const auto n_pred = static_cast<int>(rng.between(0, max_objects));
  for (int i = 0; i < n_ref; ++i) s.refs.push_back(random_box(rng, s.height, s.width));
  static constexpr double kProbs[] = {0.5, 0.6, 0.75, 0.9, 1.0};
  for (int i = 0; i < n_pred; ++i) {
    Box b;
    if (!s.refs.empty() && rng.bernoulli(0.75)) {
      b = s.refs[rng.below(s.refs.size())];
      b.x0 = std::clamp(b.x0 + static_cast<int>(rng.between(-2, 2)), 0, s.width - 2);
      b.y0 = std::clamp(b.y0 + static_cast<int>(rng.between(-2, 2)), 0, s.height - 2);
      b.x1 = std::clamp(b.x1 + static_cast<int>(rng.between(-2, 2)), b.x0 + 1, s.width - 1);
      b.y1 = std::clamp(b.y1 + static_cast<int>(rng.between(-2, 2)), b.y0 + 1, s.height - 1);
    } else {
      b = random_box(rng, s.height, s.width);
    }
    s.preds.push_back({b, kProbs[rng.below(5)]});
  }
  return s;
}

/// Brute-force AP: rank, match greedily, then sweep every cutoff recomputing
/// precision and recall from scratch and integrate the interpolated precision.
inline double average_precision(const Scene& s, double tau) {
  const std::size_t np = s.preds.size(), nr = s.refs.size();
  if (np == 0 && nr == 0) return 1.0;
  if (np == 0 || nr == 0) return 0.0;
  std::vector<std::size_t> order(np);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (s.preds[a].prob != s.preds[b].prob) return s.preds[a].prob > s.preds[b].prob;
    if (s.preds[a].box.area() != s.preds[b].box.area()) return s.preds[a].box.area() > s.preds[b].box.area();
    return a < b;
  });
  std::vector<bool> used(nr, false), tp(np, false);
  for (std::size_t k = 0; k < np; ++k) {
    double best = -1.0;
    std::size_t arg = nr;
    for (std::size_t j = 0; j < nr; ++j) {
      const double v = box_iou(s.preds[order[k]].box, s.refs[j]);
      if (!used[j] && v > best) {
        best = v;
        arg = j;
      }
    }
    if (arg < nr && best >= tau) {
      used[arg] = true;
      tp[k] = true;
    }
  }
  std::vector<double> precision, recall;
  for (std::size_t cut = 1; cut <= np; ++cut) {
    std::size_t hits = 0;
    for (std::size_t k = 0; k < cut; ++k) hits += tp[k];
    precision.push_back(double(hits) / double(cut));
    recall.push_back(double(hits) / double(nr));
  }
  double ap = 0.0;
  for (std::size_t k = 0; k < np; ++k) {
    const double prev = k == 0 ? 0.0 : recall[k - 1];
    double interp = 0.0;
    for (std::size_t m = 0; m < np; ++m) {
      if (recall[m] >= recall[k]) interp = std::max(interp, precision[m]);
    }
    ap += (recall[k] - prev) * interp;
  }
  return ap;
}

inline double mean_average_precision(const Scene& s) {
  double sum = 0.0;
  for (int pct = 50; pct <= 95; pct += 5) sum += average_precision(s, pct / 100.0);
  return sum / 10.0;
}

/// DAP by explicit enumeration of the ordered pairs (i, j), i != j, with the
/// library's per-pair mAP.
inline double dap_ordered_pairs(const std::vector<docconf::Prediction>& members) {
  const std::size_t n = members.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) sum += docconf::mean_average_precision(members[i], docconf::as_reference(members[j]));
    }
  }
  return sum / static_cast<double>(n * n - n);
}

/// Random ensemble of box predictions around a common layout.
inline std::vector<docconf::Prediction> random_ensemble(docconf::Rng& rng, std::size_t n, int max_objects = 5) {
  Scene base = random_scene(rng, max_objects);
  std::vector<docconf::Prediction> out;
  for (std::size_t k = 0; k < n; ++k) {
    Scene s = base;
    s.preds.clear();
    for (const auto& r : base.refs) {
      if (rng.bernoulli(0.2)) continue;
      Box b = r;
      b.x1 = std::clamp(b.x1 + static_cast<int>(rng.between(-2, 2)), b.x0 + 1, s.width - 1);
      b.y1 = std::clamp(b.y1 + static_cast<int>(rng.between(-2, 2)), b.y0 + 1, s.height - 1);
      s.preds.push_back({b, 0.5 + 0.5 * rng.uniform()});
    }
    if (rng.bernoulli(0.3)) s.preds.push_back({random_box(rng, s.height, s.width), 0.5 + 0.5 * rng.uniform()});
    out.push_back(to_prediction(s, "ens"));
  }
  return out;
}

inline double step(double x) { return std::floor(4 * x) / 3.0 > 1.0 ? 1.0 : std::floor(4 * x) / 3.0; }

/// y is a four-level step of x0; the other inputs are noise.
inline docconf::RegressionDataset step_data(std::uint64_t seed, std::size_t n, std::size_t dims = 4, double noise = 0.0) {
  docconf::Rng rng(seed);
  docconf::RegressionDataset d;
  for (std::size_t i = 0; i < n; ++i) {
    docconf::RegressionRow r{"r" + std::to_string(i), {}, 0.0};
    for (std::size_t k = 0; k < dims; ++k) r.x.push_back(rng.uniform());
    r.target = std::clamp(step(r.x[0]) + noise * rng.normal(), 0.0, 1.0);
    d.push_back(std::move(r));
  }
  return d;
}

}  // namespace oracle
