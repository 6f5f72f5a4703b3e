#include "docconf/metrics.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>

#include "docconf/error.hpp"

namespace docconf {

GroundTruth as_reference(const Prediction& p) {
  GroundTruth g{p.image_id, p.height, p.width, {}};
  g.objects.reserve(p.objects.size());
  for (const auto& o : p.objects) g.objects.push_back(o.polygon);
  return g;
}

std::vector<double> MapConfig::default_thresholds() {
  std::vector<double> t;
  for (int pct = 50; pct <= 95; pct += 5) t.push_back(pct / 100.0);
  return t;
}

void MapConfig::validate() const {
  if (iou_thresholds.empty()) throw InvalidArgument("IoU threshold grid is empty");
  for (std::size_t i = 0; i < iou_thresholds.size(); ++i) {
    const double t = iou_thresholds[i];
    if (!(t > 0.0 && t <= 1.0)) throw InvalidArgument("IoU thresholds must lie in (0,1]");
    if (i > 0 && !(t > iou_thresholds[i - 1])) {
      throw InvalidArgument("IoU thresholds must be strictly increasing");
    }
  }
}

ObjectMask rasterize_object(const Polygon& p, int height, int width) {
  ObjectMask m;
  const Rect b = bounding_rect(p);
  m.box = Rect{std::max(b.x_min, 0), std::max(b.y_min, 0), std::min(b.x_max, width - 1),
               std::min(b.y_max, height - 1)};
  if (m.box.x_min > m.box.x_max || m.box.y_min > m.box.y_max) {
    m.box = Rect{0, 0, -1, -1};
    return m;
  }
  m.bits = rasterize_in(p, m.box);
  m.count = static_cast<long long>(m.bits.count());
  return m;
}

double object_iou(const ObjectMask& a, const ObjectMask& b) {
  if (a.count == 0 || b.count == 0) return 0.0;
  const int x0 = std::max(a.box.x_min, b.box.x_min), x1 = std::min(a.box.x_max, b.box.x_max);
  const int y0 = std::max(a.box.y_min, b.box.y_min), y1 = std::min(a.box.y_max, b.box.y_max);
  long long inter = 0;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      inter += (a.bits.at(y - a.box.y_min, x - a.box.x_min) &&
                b.bits.at(y - b.box.y_min, x - b.box.x_min));
    }
  }
  const long long uni = a.count + b.count - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

RankedObjects prepare_prediction(const Prediction& p) {
  RankedObjects r{p.height, p.width, {}, {}};
  r.masks.reserve(p.objects.size());
  for (const auto& o : p.objects) r.masks.push_back(rasterize_object(o.polygon, p.height, p.width));
  r.rank.resize(p.objects.size());
  std::iota(r.rank.begin(), r.rank.end(), 0);
  std::stable_sort(r.rank.begin(), r.rank.end(), [&](int a, int b) {
    const auto& oa = p.objects[a];
    const auto& ob = p.objects[b];
    if (oa.mean_prob != ob.mean_prob) return oa.mean_prob > ob.mean_prob;
    return oa.pixel_area > ob.pixel_area;
  });
  return r;
}

RankedObjects prepare_reference(const GroundTruth& g) {
  RankedObjects r{g.height, g.width, {}, {}};
  r.masks.reserve(g.objects.size());
  for (const auto& poly : g.objects) r.masks.push_back(rasterize_object(poly, g.height, g.width));
  r.rank.resize(g.objects.size());
  std::iota(r.rank.begin(), r.rank.end(), 0);
  return r;
}

std::vector<std::vector<double>> iou_matrix(const RankedObjects& pred, const RankedObjects& ref) {
  if (pred.height != ref.height || pred.width != ref.width) {
    throw DimensionMismatch("image sizes differ: " + std::to_string(pred.height) + "x" +
                            std::to_string(pred.width) + " vs " + std::to_string(ref.height) +
                            "x" + std::to_string(ref.width));
  }
  std::vector<std::vector<double>> iou(pred.masks.size(),
                                       std::vector<double>(ref.masks.size(), 0.0));
  for (std::size_t i = 0; i < pred.masks.size(); ++i) {
    for (std::size_t j = 0; j < ref.masks.size(); ++j) {
      iou[i][j] = object_iou(pred.masks[i], ref.masks[j]);
    }
  }
  return iou;
}

MatchResult match_ranked(const RankedObjects& pred, const std::vector<std::vector<double>>& iou,
                         std::size_t n_ref, double tau) {
  MatchResult res;
  std::vector<bool> taken(n_ref, false);
  for (int pi : pred.rank) {
    int best = -1;
    double best_iou = -1.0;
    for (std::size_t j = 0; j < n_ref; ++j) {
      if (!taken[j] && iou[pi][j] > best_iou) {
        best_iou = iou[pi][j];
        best = static_cast<int>(j);
      }
    }
    if (best >= 0 && best_iou >= tau) {
      taken[best] = true;
      res.true_positives.emplace_back(pi, best);
      res.ranked_is_tp.push_back(true);
    } else {
      res.false_positives.push_back(pi);
      res.ranked_is_tp.push_back(false);
    }
  }
  for (std::size_t j = 0; j < n_ref; ++j) {
    if (!taken[j]) res.false_negatives.push_back(static_cast<int>(j));
  }
  return res;
}

MatchResult match_objects(const Prediction& pred, const GroundTruth& ref, double tau) {
  const RankedObjects p = prepare_prediction(pred);
  const RankedObjects r = prepare_reference(ref);
  return match_ranked(p, iou_matrix(p, r), r.masks.size(), tau);
}

double ap_from_ranked(const std::vector<bool>& ranked_is_tp, std::size_t n_ref) {
  const std::size_t n_pred = ranked_is_tp.size();
  if (n_pred == 0 && n_ref == 0) return 1.0;
  if (n_pred == 0 || n_ref == 0) return 0.0;
  std::vector<double> precision(n_pred), recall(n_pred);
  std::size_t tp = 0;
  for (std::size_t k = 0; k < n_pred; ++k) {
    tp += ranked_is_tp[k] ? 1 : 0;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    recall[k] = static_cast<double>(tp) / static_cast<double>(n_ref);
  }
  // Precision envelope from the right.
  for (std::size_t k = n_pred - 1; k > 0; --k) {
    precision[k - 1] = std::max(precision[k - 1], precision[k]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < n_pred; ++k) {
    ap += (recall[k] - prev_recall) * precision[k];
    prev_recall = recall[k];
  }
  return ap;
}

double average_precision(const Prediction& pred, const GroundTruth& ref, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw InvalidArgument("IoU threshold must lie in (0,1]");
  return ap_from_ranked(match_objects(pred, ref, tau).ranked_is_tp, ref.objects.size());
}

double mean_average_precision(const RankedObjects& pred, const RankedObjects& ref,
                              const MapConfig& cfg) {
  cfg.validate();
  const auto iou = iou_matrix(pred, ref);
  double sum = 0.0;
  for (double tau : cfg.iou_thresholds) {
    sum += ap_from_ranked(match_ranked(pred, iou, ref.masks.size(), tau).ranked_is_tp,
                          ref.masks.size());
  }
  return sum / static_cast<double>(cfg.iou_thresholds.size());
}

double mean_average_precision(const Prediction& pred, const GroundTruth& ref,
                              const MapConfig& cfg) {
  return mean_average_precision(prepare_prediction(pred), prepare_reference(ref), cfg);
}

namespace {

std::vector<std::uint8_t> union_mask(const RankedObjects& objs) {
  std::vector<std::uint8_t> u(static_cast<std::size_t>(objs.height) * objs.width, 0);
  for (const auto& m : objs.masks) {
    if (m.count == 0) continue;
    for (int y = m.box.y_min; y <= m.box.y_max; ++y) {
      for (int x = m.box.x_min; x <= m.box.x_max; ++x) {
        if (m.bits.at(y - m.box.y_min, x - m.box.x_min)) {
          u[static_cast<std::size_t>(y) * objs.width + x] = 1;
        }
      }
    }
  }
  return u;
}

}  // namespace

double pixel_iou(const RankedObjects& pred, const RankedObjects& ref) {
  if (pred.height != ref.height || pred.width != ref.width) {
    throw DimensionMismatch("image sizes differ for pixel IoU");
  }
  const auto a = union_mask(pred);
  const auto b = union_mask(ref);
  long long inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    inter += a[i] & b[i];
    uni += a[i] | b[i];
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double pixel_iou(const Prediction& pred, const GroundTruth& ref) {
  return pixel_iou(prepare_prediction(pred), prepare_reference(ref));
}

ImageScore score_image(const Prediction& pred, const GroundTruth& ref, const MapConfig& cfg) {
  const RankedObjects p = prepare_prediction(pred);
  const RankedObjects r = prepare_reference(ref);
  return ImageScore{pred.image_id, pixel_iou(p, r), mean_average_precision(p, r, cfg)};
}

DatasetScores dataset_scores(const std::vector<Prediction>& preds,
                             const std::vector<GroundTruth>& refs, const MapConfig& cfg) {
  std::map<std::string, const GroundTruth*> by_id;
  for (const auto& g : refs) by_id[g.image_id] = &g;
  std::map<std::string, bool> pred_ids;
  for (const auto& p : preds) pred_ids[p.image_id] = true;

  std::string missing;
  for (const auto& p : preds) {
    if (!by_id.count(p.image_id)) missing += (missing.empty() ? "" : ", ") + p.image_id + " (no reference)";
  }
  for (const auto& g : refs) {
    if (!pred_ids.count(g.image_id)) missing += (missing.empty() ? "" : ", ") + g.image_id + " (no prediction)";
  }
  if (!missing.empty()) throw InvalidArgument("unmatched image ids: " + missing);

  DatasetScores out;
  out.images.reserve(preds.size());
  for (const auto& p : preds) out.images.push_back(score_image(p, *by_id.at(p.image_id), cfg));
  if (!out.images.empty()) {
    for (const auto& s : out.images) {
      out.mean_pixel_iou += s.pixel_iou;
      out.mean_map += s.map;
    }
    out.mean_pixel_iou /= static_cast<double>(out.images.size());
    out.mean_map /= static_cast<double>(out.images.size());
  }
  return out;
}

}  // namespace docconf
