#include "docconf/active_learning.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "docconf/error.hpp"
#include "docconf/rng.hpp"

namespace docconf {

SelectionPolicy SelectionPolicy::parse(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) {
    throw InvalidArgument("policy '" + s + "' must be threshold:<t> or budget:<k>");
  }
  const std::string kind = s.substr(0, colon), arg = s.substr(colon + 1);
  try {
    std::size_t used = 0;
    if (kind == "threshold") {
      const double t = std::stod(arg, &used);
      if (used == arg.size()) return with_threshold(t);
    } else if (kind == "budget") {
      const long long k = std::stoll(arg, &used);
      if (used == arg.size() && k >= 0) return with_budget(static_cast<std::size_t>(k));
    }
  } catch (const std::exception&) {
  }
  throw InvalidArgument("policy '" + s + "' must be threshold:<t> or budget:<k>");
}

std::string SelectionPolicy::to_string() const {
  if (kind == Kind::Budget) return "budget:" + std::to_string(budget);
  return fmt::format("threshold:{}", threshold);
}

Selection select(const std::vector<ConfidenceScore>& scores, const SelectionPolicy& policy) {
  if (scores.empty()) throw InvalidArgument("cannot select from an empty pool");
  const bool higher = scores.front().higher_is_confident;
  for (const auto& s : scores) {
    if (s.higher_is_confident != higher) throw InvalidArgument("scores mix confidence directions");
  }
  std::vector<const ConfidenceScore*> order;
  order.reserve(scores.size());
  for (const auto& s : scores) order.push_back(&s);
  std::sort(order.begin(), order.end(), [&](const ConfidenceScore* a, const ConfidenceScore* b) {
    if (a->value != b->value) return higher ? a->value < b->value : a->value > b->value;
    return a->image_id < b->image_id;
  });

  Selection sel;
  if (policy.kind == SelectionPolicy::Kind::Budget) {
    sel.truncated = policy.budget > order.size();
    const std::size_t k = std::min(policy.budget, order.size());
    for (std::size_t i = 0; i < k; ++i) sel.ids.push_back(order[i]->image_id);
  } else {
    for (const auto* s : order) {
      const bool pick = higher ? s->value < policy.threshold : s->value > policy.threshold;
      if (pick) sel.ids.push_back(s->image_id);
    }
  }
  return sel;
}

std::string_view to_string(AlEstimator e) noexcept {
  switch (e) {
    case AlEstimator::Pce: return "pce";
    case AlEstimator::Dap: return "dap";
    case AlEstimator::Dov: return "dov";
    case AlEstimator::MapRfr: return "map-rfr";
    case AlEstimator::Oracle: return "oracle";
    case AlEstimator::Random: return "random";
  }
  return "?";
}

AlEstimator parse_al_estimator(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "oracle") return AlEstimator::Oracle;
  if (lower == "random") return AlEstimator::Random;
  switch (parse_estimator(lower)) {
    case Estimator::Pce: return AlEstimator::Pce;
    case Estimator::Dap: return AlEstimator::Dap;
    case Estimator::Dov: return AlEstimator::Dov;
    case Estimator::MapRfr: return AlEstimator::MapRfr;
  }
  return AlEstimator::Random;
}

void SimulationConfig::validate() const {
  detector.validate();
  map.validate();
  postprocess.validate();
  features.validate();
  forest.validate();
  if (iterations < 0) throw InvalidArgument("iterations must be >= 0");
  if ((estimator == AlEstimator::Dap || estimator == AlEstimator::Dov) && ensemble_size < 2) {
    throw InsufficientEnsemble("DAP/DOV selection needs an ensemble of at least 2");
  }
  if (estimator == AlEstimator::MapRfr && rfr_train_size < 2) {
    throw InvalidArgument("mAP-RFR selection needs at least 2 regressor training images");
  }
}

namespace {

// Stream tags keep pool, test and regressor draws independent.
constexpr std::uint64_t kPoolStream = 0x706f6f6c;
constexpr std::uint64_t kTestStream = 0x74657374;
constexpr std::uint64_t kRfrStream = 0x726672;
constexpr std::uint64_t kCorpusStream = 0x636f7270;

struct TestMetrics {
  double iou = 0.0;
  double map = 0.0;
};

TestMetrics evaluate_test(const std::vector<SyntheticImage>& test, double quality,
                          const SimulationConfig& cfg) {
  TestMetrics m;
  if (test.empty()) return m;
  for (const auto& img : test) {
    const double s = cfg.detector.severity(img.difficulty, quality);
    const Prediction p =
        perturb_prediction(img.gt, s, cfg.detector.mixture, cfg.detector,
                           derive_seed(cfg.seed, {kTestStream, hash_string(img.gt.image_id)}),
                           cfg.postprocess);
    const ImageScore sc = score_image(p, img.gt, cfg.map);
    m.iou += sc.pixel_iou;
    m.map += sc.map;
  }
  m.iou /= static_cast<double>(test.size());
  m.map /= static_cast<double>(test.size());
  return m;
}

}  // namespace

RegressionDataset synthetic_regression_rows(const std::vector<SyntheticImage>& corpus, double quality,
                                            const SimulationConfig& cfg, std::uint64_t seed) {
  RegressionDataset rows;
  rows.reserve(corpus.size());
  for (const auto& img : corpus) {
    const double s = cfg.detector.severity(img.difficulty, quality);
    const Prediction p = perturb_prediction(img.gt, s, cfg.detector.mixture, cfg.detector,
                                            derive_seed(seed, {hash_string(img.gt.image_id)}),
                                            cfg.postprocess);
    rows.push_back(RegressionRow{img.gt.image_id, feature_vector(p, cfg.features).values,
                                 mean_average_precision(p, img.gt, cfg.map)});
  }
  return rows;
}

PoolState simulate(const std::vector<SyntheticImage>& pool, const std::vector<SyntheticImage>& test,
                   const SimulationConfig& cfg) {
  cfg.validate();
  if (pool.empty()) throw InvalidArgument("active-learning pool is empty");
  const auto& det = cfg.detector;

  std::map<std::string, const SyntheticImage*> by_id;
  PoolState state;
  for (const auto& img : pool) {
    if (!by_id.emplace(img.gt.image_id, &img).second) {
      throw InvalidArgument("duplicate pool image id '" + img.gt.image_id + "'");
    }
    state.unlabeled.push_back(img.gt.image_id);
  }

  ForestModel rfr;
  if (cfg.estimator == AlEstimator::MapRfr) {
    const auto source = generate_corpus(cfg.rfr_train_size, det,
                                        derive_seed(cfg.seed, {kRfrStream}), "rfr");
    const auto rows =
        synthetic_regression_rows(source, det.q_min, cfg, derive_seed(cfg.seed, {kRfrStream, 1}));
    ForestParams fp = cfg.forest;
    fp.seed = derive_seed(cfg.seed, {kRfrStream, 2});
    rfr = fit(rows, fp, cfg.features);
  }

  const std::string est_name(to_string(cfg.estimator));
  const std::string policy_name = cfg.policy.to_string();
  double effective = 0.0;
  double q = det.quality(effective);
  TestMetrics tm = evaluate_test(test, q, cfg);
  state.log.push_back(IterationLog{0, est_name, policy_name, 0, 0, q, tm.iou, tm.map, {}});

  for (int t = 1; t <= cfg.iterations && !state.unlabeled.empty(); ++t) {
    std::vector<ConfidenceScore> scores;
    scores.reserve(state.unlabeled.size());
    for (const auto& id : state.unlabeled) {
      const SyntheticImage& img = *by_id.at(id);
      const double s = det.severity(img.difficulty, q);
      const std::uint64_t img_seed =
          derive_seed(cfg.seed, {kPoolStream, static_cast<std::uint64_t>(t), hash_string(id)});
      ConfidenceScore cs;
      switch (cfg.estimator) {
        case AlEstimator::Pce:
          cs = pce(perturb_prediction(img.gt, s, det.mixture, det, img_seed, cfg.postprocess));
          break;
        case AlEstimator::Dap:
          cs = dap(perturb_ensemble(img.gt, s, det, derive_seed(img_seed, {1}), cfg.ensemble_size,
                                    cfg.postprocess),
                   cfg.map);
          break;
        case AlEstimator::Dov:
          cs = dov(perturb_ensemble(img.gt, s, det, derive_seed(img_seed, {1}), cfg.ensemble_size,
                                    cfg.postprocess));
          break;
        case AlEstimator::MapRfr: {
          const Prediction p = perturb_prediction(img.gt, s, det.mixture, det, img_seed, cfg.postprocess);
          cs = ConfidenceScore{id, Estimator::MapRfr, predict(rfr, feature_vector(p, cfg.features)),
                               true, false};
          break;
        }
        case AlEstimator::Oracle: {
          // The true mAP, i.e. a perfect mAP regressor.
          const Prediction p = perturb_prediction(img.gt, s, det.mixture, det, img_seed, cfg.postprocess);
          cs = ConfidenceScore{id, Estimator::MapRfr, mean_average_precision(p, img.gt, cfg.map),
                               true, false};
          break;
        }
        case AlEstimator::Random: {
          Rng rng(img_seed);
          cs = ConfidenceScore{id, Estimator::MapRfr, rng.uniform(), true, false};
          break;
        }
      }
      cs.image_id = id;
      scores.push_back(cs);
    }

    const Selection sel = select(scores, cfg.policy);
    const std::set<std::string> chosen(sel.ids.begin(), sel.ids.end());
    for (const auto& id : sel.ids) {
      state.labeled.push_back(id);
      effective += det.informativeness(by_id.at(id)->difficulty);
    }
    std::erase_if(state.unlabeled, [&](const std::string& id) { return chosen.count(id) > 0; });

    q = det.quality(effective);
    tm = evaluate_test(test, q, cfg);
    state.iteration = t;
    state.log.push_back(IterationLog{t, est_name, policy_name, sel.ids.size(), state.labeled.size(),
                                     q, tm.iou, tm.map, sel.ids});
  }
  return state;
}

PoolState simulate(const SimulationConfig& cfg) {
  cfg.validate();
  const auto pool = generate_corpus(cfg.pool_size, cfg.detector,
                                    derive_seed(cfg.seed, {kCorpusStream, 0}), "pool");
  const auto test = generate_corpus(cfg.test_size, cfg.detector,
                                    derive_seed(cfg.seed, {kCorpusStream, 1}), "test");
  return simulate(pool, test, cfg);
}

}  // namespace docconf
