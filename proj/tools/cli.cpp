#include "cli.hpp"

#include <CLI11.hpp>
#include <docconf/active_learning.hpp>
#include <docconf/error.hpp>
#include <docconf/evaluation.hpp>
#include <docconf/io.hpp>
#include <docconf/rng.hpp>
#include <docconf/synthetic.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <thread>

namespace docconf::cli {

namespace {

namespace fs = std::filesystem;

constexpr std::uint64_t kSynthCorpus = 0;
constexpr std::uint64_t kSynthMain = 1;
constexpr std::uint64_t kSynthEnsemble = 2;
constexpr std::uint64_t kSynthSeverity = 3;

/// Runs f(0..n-1) on up to `jobs` threads. The first failure in index order is
/// rethrown, so errors do not depend on scheduling.
template <class F>
void parallel_for(std::size_t n, int jobs, F&& f) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            f(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string meta_json(const OutputHeader& h) {
  nlohmann::ordered_json j;
  j["tool"] = "docconf";
  j["version"] = kToolVersion;
  j["command"] = h.command;
  for (const auto& [k, v] : h.fields) j[k] = v;
  j["config_digest"] = h.digest();
  return j.dump();
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

std::string num(double v) { return format_number(v); }

std::string hex(std::uint64_t v) { return fmt::format("{:016x}", v); }

struct Inputs {
  std::string manifest;
  std::string out = "-";
  int jobs = 1;
};

void add_post_options(CLI::App* sub, PostprocessConfig& post) {
  sub->add_option("--threshold", post.binarize_threshold, "Binarization threshold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  sub->add_option("--connectivity", post.connectivity, "Pixel connectivity (4 or 8)")
      ->check(CLI::IsMember({4, 8}))
      ->capture_default_str();
  sub->add_option("--min-area", post.min_area_px, "Drop components smaller than this many pixels")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

void add_post_fields(OutputHeader& h, const PostprocessConfig& post) {
  h.add("threshold", num(post.binarize_threshold));
  h.add("connectivity", std::to_string(post.connectivity));
  h.add("min_area", std::to_string(post.min_area_px));
}

void add_jobs_option(CLI::App* sub, int& jobs) {
  sub->add_option("--jobs,-j", jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
}

void add_detector_options(CLI::App* sub, SyntheticDetectorConfig& d) {
  sub->add_option("--q-min", d.q_min, "Detector quality with no labels")->capture_default_str();
  sub->add_option("--q-max", d.q_max, "Asymptotic detector quality")->capture_default_str();
  sub->add_option("--kappa", d.kappa, "Label count scale of the quality curve")->capture_default_str();
  sub->add_option("--difficulty-lo", d.difficulty_lo, "Lowest image difficulty")->capture_default_str();
  sub->add_option("--difficulty-hi", d.difficulty_hi, "Highest image difficulty")->capture_default_str();
  sub->add_option("--difficulty-shape", d.difficulty_shape, "Difficulty skew exponent")->capture_default_str();
  sub->add_option("--informativeness", d.informativeness_exponent,
                  "Exponent of the difficulty weight of a labelled image")
      ->capture_default_str();
  sub->add_option("--dropout-noise", d.dropout_noise_scale, "Severity scale of ensemble members")
      ->capture_default_str();
  sub->add_option("--jitter", d.mixture.jitter, "Weight of boundary jitter")->capture_default_str();
  sub->add_option("--fragmentation", d.mixture.fragmentation, "Weight of object splitting")
      ->capture_default_str();
  sub->add_option("--miss", d.mixture.miss, "Weight of missed objects")->capture_default_str();
  sub->add_option("--spurious", d.mixture.spurious, "Weight of spurious blobs")->capture_default_str();
  sub->add_option("--height", d.image_height, "Synthetic image height")->capture_default_str();
  sub->add_option("--width", d.image_width, "Synthetic image width")->capture_default_str();
}

void add_detector_fields(OutputHeader& h, const SyntheticDetectorConfig& d) {
  h.add("q_min", num(d.q_min));
  h.add("q_max", num(d.q_max));
  h.add("kappa", num(d.kappa));
  h.add("difficulty", fmt::format("{}:{}^{}", num(d.difficulty_lo), num(d.difficulty_hi), num(d.difficulty_shape)));
  h.add("informativeness", num(d.informativeness_exponent));
  h.add("dropout_noise", num(d.dropout_noise_scale));
  h.add("mixture", fmt::format("{}/{}/{}/{}", num(d.mixture.jitter), num(d.mixture.fragmentation),
                               num(d.mixture.miss), num(d.mixture.spurious)));
  h.add("image", fmt::format("{}x{}", d.image_height, d.image_width));
}

void add_forest_options(CLI::App* sub, ForestParams& f) {
  sub->add_option("--trees", f.n_trees, "Number of trees")->capture_default_str();
  sub->add_option("--max-depth", f.max_depth, "Maximum depth, 0 for unlimited")->capture_default_str();
  sub->add_option("--min-samples-split", f.min_samples_split, "Smallest node that may split")
      ->capture_default_str();
  sub->add_option("--min-samples-leaf", f.min_samples_leaf, "Smallest leaf")->capture_default_str();
  sub->add_option("--features-per-split", f.features_per_split, "Candidate features per split, 0 for all")
      ->capture_default_str();
}

void add_forest_fields(OutputHeader& h, const ForestParams& f) {
  h.add("trees", std::to_string(f.n_trees));
  h.add("max_depth", std::to_string(f.max_depth));
  h.add("min_samples_split", std::to_string(f.min_samples_split));
  h.add("min_samples_leaf", std::to_string(f.min_samples_leaf));
  h.add("features_per_split", std::to_string(f.features_per_split));
}

/// Checks the whole manifest against a command's needs before any work starts.
void require_entries(const Manifest& m, bool need_gt, std::size_t min_members, bool need_maps = false) {
  std::vector<std::string> problems;
  for (const auto& e : m.entries) {
    const std::size_t members = need_maps || e.predictions.empty() ? e.maps.size() : e.predictions.size();
    if (need_maps && e.maps.empty()) {
      problems.push_back("'" + e.image_id + "': no probability maps");
    } else if (members < min_members) {
      problems.push_back(fmt::format("'{}': {} prediction(s), need at least {}", e.image_id, members, min_members));
    }
    if (need_gt && !e.ground_truth) problems.push_back("'" + e.image_id + "': no ground_truth");
  }
  if (m.entries.empty()) problems.push_back("manifest lists no images");
  if (!problems.empty()) {
    std::string msg = std::to_string(problems.size()) + " manifest problem(s):";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw InvalidArgument(msg);
  }
}

void check_dims(const ManifestEntry& e, int height, int width, const fs::path& source) {
  if ((e.height > 0 && e.height != height) || (e.width > 0 && e.width != width)) {
    throw DimensionMismatch(fmt::format("{}: {}x{} does not match the manifest's {}x{} for '{}'", source.string(),
                                        height, width, e.height, e.width, e.image_id));
  }
}

/// Predictions listed for an entry, or extracted from its maps when none are.
std::vector<Prediction> load_members(const Manifest& m, const ManifestEntry& e, const PostprocessConfig& post) {
  std::vector<Prediction> out;
  if (!e.predictions.empty()) {
    for (const auto& p : e.predictions) {
      const auto path = m.resolve(p);
      auto pred = to_prediction(load_polygons(path));
      if (pred.image_id != e.image_id) {
        throw InvalidArgument(fmt::format("{}: image_id '{}' does not match manifest entry '{}'", path.string(),
                                          pred.image_id, e.image_id));
      }
      check_dims(e, pred.height, pred.width, path);
      out.push_back(std::move(pred));
    }
  } else {
    for (const auto& p : e.maps) {
      const auto path = m.resolve(p);
      const auto map = load_probability_map(path);
      check_dims(e, map.height(), map.width(), path);
      out.push_back(extract_objects(map, post, e.image_id));
    }
  }
  return out;
}

GroundTruth load_gt(const Manifest& m, const ManifestEntry& e) {
  const auto path = m.resolve(*e.ground_truth);
  auto gt = to_ground_truth(load_polygons(path));
  if (gt.image_id != e.image_id) {
    throw InvalidArgument(fmt::format("{}: image_id '{}' does not match manifest entry '{}'", path.string(),
                                      gt.image_id, e.image_id));
  }
  check_dims(e, gt.height, gt.width, path);
  return gt;
}

std::vector<FeatureVector> features_from_csv(const std::string& path, const FeatureConfig& cfg) {
  const auto table = read_csv(path);
  const std::string expected = "feature_config=" + cfg.fingerprint();
  if (std::find(table.comments.begin(), table.comments.end(), expected) == table.comments.end()) {
    throw InvalidArgument(path + ": features were not computed with " + expected);
  }
  auto rows = parse_features_csv(table);
  for (const auto& r : rows) {
    if (r.values.size() != cfg.vector_length()) {
      throw LengthMismatch(fmt::format("{}: '{}' has {} values, expected {}", path, r.image_id, r.values.size(),
                                       cfg.vector_length()));
    }
  }
  return rows;
}

/// (features, target mAP) per image, from a manifest with ground truth or from
/// a features CSV joined with a targets CSV.
RegressionDataset regression_rows(const Inputs& in, const std::string& features_path,
                                  const std::string& targets_path, const PostprocessConfig& post,
                                  const MapConfig& map_cfg, const FeatureConfig& fcfg) {
  RegressionDataset data;
  if (!in.manifest.empty()) {
    const auto m = load_manifest(in.manifest);
    require_entries(m, true, 1);
    data.resize(m.entries.size());
    parallel_for(m.entries.size(), in.jobs, [&](std::size_t i) {
      const auto& e = m.entries[i];
      const auto pred = load_members(m, e, post).front();
      const auto gt = load_gt(m, e);
      data[i] = RegressionRow{e.image_id, feature_vector(pred, fcfg).values, mean_average_precision(pred, gt, map_cfg)};
    });
    return data;
  }
  if (features_path.empty() || targets_path.empty()) {
    throw InvalidArgument("give either --manifest or both --features and --targets");
  }
  const auto features = features_from_csv(features_path, fcfg);
  const auto targets = parse_targets_csv(read_csv(targets_path));
  std::vector<std::string> missing;
  for (const auto& f : features) {
    auto it = targets.find(f.image_id);
    if (it == targets.end()) {
      missing.push_back(f.image_id);
    } else {
      data.push_back(RegressionRow{f.image_id, f.values, it->second});
    }
  }
  if (!missing.empty()) {
    std::string msg = "no target for " + std::to_string(missing.size()) + " image(s):";
    for (const auto& id : missing) msg += " " + id;
    throw InvalidArgument(msg);
  }
  return data;
}

// --- subcommands ----------------------------------------------------------------

struct ExtractCmd {
  Inputs in;
  PostprocessConfig post;
  std::string out_dir;

  void attach(CLI::App& app) {
    auto* s = app.add_subcommand("extract", "Extract polygon predictions from probability maps");
    s->add_option("--manifest,-m", in.manifest, "Manifest listing probability maps")->required();
    s->add_option("--out-dir,-o", out_dir, "Directory for polygon files and the output manifest")->required();
    add_post_options(s, post);
    add_jobs_option(s, in.jobs);
  }

  void run(std::ostream& out) {
    post.validate();
    const auto m = load_manifest(in.manifest);
    require_entries(m, false, 1, true);
    OutputHeader h{"extract", {}};
    add_post_fields(h, post);
    const auto meta = meta_json(h);
    const fs::path dir = out_dir;
    fs::create_directories(dir / "pred");
    const auto abs_dir = fs::absolute(dir).lexically_normal();

    Manifest result;
    result.base_dir = dir;
    result.entries.resize(m.entries.size());
    parallel_for(m.entries.size(), in.jobs, [&](std::size_t i) {
      const auto& e = m.entries[i];
      ManifestEntry& r = result.entries[i];
      r.image_id = e.image_id;
      for (std::size_t k = 0; k < e.maps.size(); ++k) {
        const auto path = m.resolve(e.maps[k]);
        const auto map = load_probability_map(path);
        check_dims(e, map.height(), map.width(), path);
        r.height = map.height();
        r.width = map.width();
        const auto pred = extract_objects(map, post, e.image_id);
        const fs::path rel =
            fs::path("pred") / (e.maps.size() == 1 ? e.image_id + ".json" : fmt::format("{}_m{}.json", e.image_id, k));
        write_text_file(dir / rel, polygons_to_json(pred, meta));
        r.predictions.push_back(rel);
      }
      if (e.ground_truth) {
        r.ground_truth = fs::absolute(m.resolve(*e.ground_truth)).lexically_normal().lexically_relative(abs_dir);
      }
    });
    save_manifest(result, dir / "manifest.json", meta);
    out << fmt::format("extracted {} image(s) into {}\n", result.entries.size(), (dir / "manifest.json").string());
  }
};

struct ScoreCmd {
  Inputs in;
  PostprocessConfig post;

  void attach(CLI::App& app) {
    auto* s = app.add_subcommand("score", "Per-image pixel IoU and mAP against ground truth");
    s->add_option("--manifest,-m", in.manifest, "Manifest with predictions (or maps) and ground truth")->required();
    s->add_option("--out,-o", in.out, "Output CSV ('-' for stdout)")->capture_default_str();
    add_post_options(s, post);
    add_jobs_option(s, in.jobs);
  }

  void run(std::ostream& out) {
    post.validate();
    const auto m = load_manifest(in.manifest);
    require_entries(m, true, 1);
    const MapConfig map_cfg;
    std::vector<Prediction> preds(m.entries.size());
    std::vector<GroundTruth> gts(m.entries.size());
    parallel_for(m.entries.size(), in.jobs, [&](std::size_t i) {
      preds[i] = load_members(m, m.entries[i], post).front();
      gts[i] = load_gt(m, m.entries[i]);
    });
    OutputHeader h{"score", {}};
    add_post_fields(h, post);
    h.add("iou_thresholds", "0.5:0.95:0.05");
    emit(in.out, h.render() + image_scores_csv(dataset_scores(preds, gts, map_cfg)), out);
  }
};

struct ConfidenceCmd {
  Inputs in;
  PostprocessConfig post;
  std::string estimator;
  std::string model;

  void attach(CLI::App& app) {
    auto* s = app.add_subcommand("confidence", "Per-image confidence scores");
    s->add_option("--manifest,-m", in.manifest, "Manifest with predictions or maps")->required();
    s->add_option("--estimator,-e", estimator, "pce, dap, dov or map-rfr")
        ->required()
        ->check(CLI::IsMember({"pce", "dap", "dov", "map-rfr"}, CLI::ignore_case));
    s->add_option("--model", model, "Trained regressor (map-rfr)");
    s->add_option("--out,-o", in.out, "Output CSV ('-' for stdout)")->capture_default_str();
    add_post_options(s, post);
    add_jobs_option(s, in.jobs);
  }

  void run(std::ostream& out) {
    post.validate();
    const Estimator est = parse_estimator(estimator);
    std::optional<ForestModel> forest;
    OutputHeader h{"confidence", {}};
    h.add("estimator", std::string(to_string(est)));
    if (est == Estimator::MapRfr) {
      if (model.empty()) throw InvalidArgument("--estimator map-rfr requires --model");
      forest = load(model);
      h.add("model_digest", hex(hash_string([&] {
              const auto bytes = serialize(*forest);
              return std::string(bytes.begin(), bytes.end());
            }())));
    }
    const auto m = load_manifest(in.manifest);
    const bool ensemble = est == Estimator::Dap || est == Estimator::Dov;
    require_entries(m, false, ensemble ? 2 : 1);
    add_post_fields(h, post);
    const MapConfig map_cfg;
    std::vector<ConfidenceScore> scores(m.entries.size());
    parallel_for(m.entries.size(), in.jobs, [&](std::size_t i) {
      const auto& e = m.entries[i];
      auto members = load_members(m, e, post);
      switch (est) {
        case Estimator::Pce: scores[i] = pce(members.front()); break;
        case Estimator::Dap: scores[i] = dap(DropoutEnsemble{e.image_id, std::move(members)}, map_cfg); break;
        case Estimator::Dov: scores[i] = dov(DropoutEnsemble{e.image_id, std::move(members)}); break;
        case Estimator::MapRfr:
          scores[i] = ConfidenceScore{e.image_id, Estimator::MapRfr,
                                      predict(*forest, feature_vector(members.front(), forest->feature_config())),
                                      true, false};
          break;
      }
    });
    emit(in.out, h.render() + confidence_csv(scores), out);
  }
};

struct FeaturesCmd {
  Inputs in;
  PostprocessConfig post;
  FeatureConfig fcfg;

  void attach(CLI::App& app) {
    auto* s = app.add_subcommand("features", "Histogram feature vectors of object statistics");
    s->add_option("--manifest,-m", in.manifest, "Manifest with predictions or maps")->required();
    s->add_option("--bins", fcfg.bins, "Histogram bins per feature")->check(CLI::PositiveNumber)->capture_default_str();
    s->add_option("--out,-o", in.out, "Output CSV ('-' for stdout)")->capture_default_str();
    add_post_options(s, post);
    add_jobs_option(s, in.jobs);
  }

  void run(std::ostream& out) {
    post.validate();
    fcfg.validate();
    const auto m = load_manifest(in.manifest);
    require_entries(m, false, 1);
    std::vector<FeatureVector> rows(m.entries.size());
    parallel_for(m.entries.size(), in.jobs,
                 [&](std::size_t i) { rows[i] = feature_vector(load_members(m, m.entries[i], post).front(), fcfg); });
    OutputHeader h{"features", {}};
    add_post_fields(h, post);
    h.add("bins", std::to_string(fcfg.bins));
    emit(in.out, h.render() + features_csv(rows, fcfg), out);
  }
};

struct TrainCmd {
  Inputs in;
  PostprocessConfig post;
  FeatureConfig fcfg;
  ForestParams params;
  std::string features, targets, model;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App& app) {
    auto* s = app.add_subcommand("train-rfr", "Train the mAP regressor");
    s->add_option("--manifest,-m", in.manifest, "Manifest with predictions and ground truth");
    s->add_option("--features", features, "Features CSV (with --targets)");
    s->add_option("--targets", targets, "CSV with image_id and map columns (e.g. score output)");
    s->add_option("--model", model, "Output model file")->required();
    s->add_option("--seed", seed, "Random seed")->required();
    s->add_option("--bins", fcfg.bins, "Histogram bins per feature")->check(CLI::PositiveNumber)->capture_default_str();
    add_forest_options(s, params);
    add_post_options(s, post);
    add_jobs_option(s, in.jobs);
  }

  void run(std::ostream& out) {
    post.validate();
    fcfg.validate();
    params.seed = *seed;
    params.validate();
    const auto data = regression_rows(in, features, targets, post, MapConfig{}, fcfg);
    const auto forest = fit(data, params, fcfg, in.jobs);
    save(forest, model);
    out << fmt::format("trained {} trees on {} rows; oob_mse={}\n", forest.trees().size(), data.size(),
                       forest.oob_mse() ? num(*forest.oob_mse()) : "n/a");
  }
};

struct EvalCmd {
  Inputs in;
  PostprocessConfig post;
  std::string features, targets, model;

  void attach(CLI::App& app) {
    auto* s = app.add_subcommand("eval-rfr", "Mean squared error of the mAP regressor");
    s->add_option("--model", model, "Trained model file")->required();
    s->add_option("--manifest,-m", in.manifest, "Manifest with predictions and ground truth");
    s->add_option("--features", features, "Features CSV (with --targets)");
    s->add_option("--targets", targets, "CSV with image_id and map columns");
    s->add_option("--out,-o", in.out, "Per-image report CSV ('-' for stdout)")->capture_default_str();
    add_post_options(s, post);
    add_jobs_option(s, in.jobs);
  }

  void run(std::ostream& out) {
    post.validate();
    const auto forest = load(model);
    const auto data = regression_rows(in, features, targets, post, MapConfig{}, forest.feature_config());
    OutputHeader h{"eval-rfr", {}};
    add_post_fields(h, post);
    const auto bytes = serialize(forest);
    h.add("model_digest", hex(hash_string(std::string(bytes.begin(), bytes.end()))));
    std::string csv = "image_id,target,predicted\n";
    for (const auto& r : data) csv += fmt::format("{},{},{}\n", r.image_id, num(r.target), num(predict(forest, r.x)));
    const double err = mse(forest, data);
    csv += "# mse=" + num(err) + "\n";
    emit(in.out, h.render() + csv, out);
    if (in.out != "-" && !in.out.empty()) out << "mse=" << num(err) << "\n";
  }
};

struct RejectCmd {
  std::string scores_path, image_scores_path, out_dir, grid_spec, metric_name = "map";
  int bootstrap = 100;
  int orderings = 100;
  int divisions = 100;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App& app) {
    auto* s = app.add_subcommand("reject-curve", "Reject curve, bootstrap band and random baseline");
    s->add_option("--scores", scores_path, "Confidence CSV")->required();
    s->add_option("--image-scores", image_scores_path, "Per-image score CSV")->required();
    s->add_option("--out-dir,-o", out_dir, "Directory for curve.csv, band.csv and random.csv")->required();
    s->add_option("--grid", grid_spec, "Thresholds: dap, dov, unit, rank or lo:hi:step (default per estimator)");
    s->add_option("--metric", metric_name, "map or pixel-iou")
        ->check(CLI::IsMember({"map", "pixel-iou"}))
        ->capture_default_str();
    s->add_option("--bootstrap", bootstrap, "Bootstrap resamples")->check(CLI::PositiveNumber)->capture_default_str();
    s->add_option("--random-orderings", orderings, "Random removal orderings")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    s->add_option("--divisions", divisions, "Rejection-rate grid divisions")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    s->add_option("--seed", seed, "Random seed")->required();
  }

  void run(std::ostream& out) {
    const auto scores = parse_confidence_csv(read_csv(scores_path));
    const auto image_scores = parse_image_scores_csv(read_csv(image_scores_path));
    if (scores.empty()) throw InvalidArgument(scores_path + ": no scores");
    for (const auto& s : scores) {
      if (s.estimator != scores.front().estimator) throw InvalidArgument(scores_path + ": mixes estimators");
    }
    const Estimator est = scores.front().estimator;
    std::vector<double> grid;
    std::string grid_name = grid_spec;
    if (grid_spec.empty()) {
      grid = default_threshold_grid(est);
      grid_name = est == Estimator::Dov ? "dov" : "unit";
    } else if (grid_spec == "rank") {
      grid = rank_threshold_grid(scores);
    } else {
      grid = parse_threshold_grid(grid_spec);
    }
    const CurveMetric metric = metric_name == "map" ? CurveMetric::Map : CurveMetric::PixelIou;

    OutputHeader h{"reject-curve", {}};
    h.add("estimator", std::string(to_string(est)));
    h.add("metric", metric_name);
    h.add("grid", grid_name);
    h.add("bootstrap", std::to_string(bootstrap));
    h.add("random_orderings", std::to_string(orderings));
    h.add("divisions", std::to_string(divisions));
    h.add("seed", std::to_string(*seed));
    const std::string header = h.render();

    const auto curve = reject_curve(scores, image_scores, grid, metric);
    const auto band = bootstrap_band(scores, image_scores, grid, bootstrap, derive_seed(*seed, {0}), metric, divisions);
    const auto random = random_baseline(image_scores, orderings, derive_seed(*seed, {1}), metric, divisions);
    const fs::path dir = out_dir;
    write_text_file(dir / "curve.csv", header + curve_csv(curve) + "# auc=" + num(area_under_curve(curve.points)) + "\n");
    write_text_file(dir / "band.csv", header + band_csv(band));
    write_text_file(dir / "random.csv", header + band_csv(random));
    out << fmt::format("{} curve points written to {}\n", curve.points.size(), dir.string());
  }
};

struct SelectCmd {
  std::string scores_path, policy_spec, out_path = "-";

  void attach(CLI::App& app) {
    auto* s = app.add_subcommand("al-select", "Pick the least-confident images for annotation");
    s->add_option("--scores", scores_path, "Confidence CSV")->required();
    s->add_option("--policy", policy_spec, "threshold:<t> or budget:<k>")->required();
    s->add_option("--out,-o", out_path, "Output list ('-' for stdout)")->capture_default_str();
  }

  void run(std::ostream& out, std::ostream& err) {
    const auto policy = SelectionPolicy::parse(policy_spec);
    const auto scores = parse_confidence_csv(read_csv(scores_path));
    const auto sel = select(scores, policy);
    OutputHeader h{"al-select", {}};
    h.add("policy", policy.to_string());
    if (!scores.empty()) h.add("estimator", std::string(to_string(scores.front().estimator)));
    std::string text = h.render();
    if (sel.truncated) {
      text += "# truncated=1\n";
      err << fmt::format("warning: budget {} exceeds the pool of {}; selecting all\n", policy.budget, scores.size());
    }
    text += "image_id\n";
    for (const auto& id : sel.ids) text += id + "\n";
    emit(out_path, text, out);
  }
};

struct SimulateCmd {
  SimulationConfig cfg;
  std::string estimator = "dap", policy_spec = "budget:10", out_path = "-";
  std::optional<std::uint64_t> seed;

  void attach(CLI::App& app) {
    auto* s = app.add_subcommand("al-simulate", "Simulate active learning with a synthetic detector");
    s->add_option("--estimator,-e", estimator, "pce, dap, dov, map-rfr, oracle or random")
        ->check(CLI::IsMember({"pce", "dap", "dov", "map-rfr", "oracle", "random"}, CLI::ignore_case))
        ->capture_default_str();
    s->add_option("--policy", policy_spec, "threshold:<t> or budget:<k>")->capture_default_str();
    s->add_option("--iterations", cfg.iterations, "Annotation rounds")->capture_default_str();
    s->add_option("--seed", seed, "Random seed")->required();
    s->add_option("--pool-size", cfg.pool_size, "Unlabelled pool size")->capture_default_str();
    s->add_option("--test-size", cfg.test_size, "Test set size")->capture_default_str();
    s->add_option("--ensemble-size", cfg.ensemble_size, "Dropout ensemble size")->capture_default_str();
    s->add_option("--rfr-train-size", cfg.rfr_train_size, "Images used to train map-rfr")->capture_default_str();
    s->add_option("--out,-o", out_path, "Output CSV ('-' for stdout)")->capture_default_str();
    add_detector_options(s, cfg.detector);
    add_forest_options(s, cfg.forest);
  }

  void run(std::ostream& out) {
    cfg.estimator = parse_al_estimator(estimator);
    cfg.policy = SelectionPolicy::parse(policy_spec);
    cfg.seed = *seed;
    cfg.detector.seed = *seed;
    cfg.validate();
    OutputHeader h{"al-simulate", {}};
    h.add("estimator", std::string(to_string(cfg.estimator)));
    h.add("policy", cfg.policy.to_string());
    h.add("iterations", std::to_string(cfg.iterations));
    h.add("pool_size", std::to_string(cfg.pool_size));
    h.add("test_size", std::to_string(cfg.test_size));
    h.add("ensemble_size", std::to_string(cfg.ensemble_size));
    h.add("rfr_train_size", std::to_string(cfg.rfr_train_size));
    add_detector_fields(h, cfg.detector);
    add_forest_fields(h, cfg.forest);
    h.add("seed", std::to_string(*seed));
    const auto state = simulate(cfg);
    emit(out_path, h.render() + al_log_csv(state.log), out);
  }
};

struct SynthCmd {
  SyntheticDetectorConfig det;
  std::size_t n = 20;
  std::size_t ensemble_size = kDefaultEnsembleSize;
  std::optional<double> quality;
  bool uniform_severity = false;
  std::string out_dir, prefix = "img";
  std::optional<std::uint64_t> seed;

  void attach(CLI::App& app) {
    auto* s = app.add_subcommand("synth", "Generate a synthetic corpus with ground truth, maps and ensembles");
    s->add_option("--n", n, "Number of images")->check(CLI::PositiveNumber)->capture_default_str();
    s->add_option("--seed", seed, "Random seed")->required();
    s->add_option("--out-dir,-o", out_dir, "Output directory")->required();
    s->add_option("--ensemble-size", ensemble_size, "Ensemble members per image")->capture_default_str();
    s->add_option("--quality", quality, "Detector quality (default: q-min)");
    s->add_flag("--uniform-severity", uniform_severity, "Draw severity uniformly instead of from difficulty");
    s->add_option("--prefix", prefix, "Image id prefix")->capture_default_str();
    add_detector_options(s, det);
  }

  void run(std::ostream& out) {
    det.seed = *seed;
    det.validate();
    const double q = quality.value_or(det.q_min);
    if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("--quality must be in [0,1]");
    if (ensemble_size < 2) throw InvalidArgument("--ensemble-size must be at least 2");
    OutputHeader h{"synth", {}};
    h.add("n", std::to_string(n));
    h.add("ensemble_size", std::to_string(ensemble_size));
    h.add("quality", num(q));
    h.add("uniform_severity", uniform_severity ? "1" : "0");
    h.add("prefix", prefix);
    add_detector_fields(h, det);
    h.add("seed", std::to_string(*seed));
    const auto meta = meta_json(h);

    const fs::path dir = out_dir;
    fs::create_directories(dir / "gt");
    fs::create_directories(dir / "maps");
    const auto corpus = generate_corpus(n, det, derive_seed(*seed, {kSynthCorpus}), prefix);
    Manifest single, ensemble;
    std::string truth = "image_id,difficulty,severity\n";
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const auto& img = corpus[i];
      const auto& id = img.gt.image_id;
      const double severity = uniform_severity ? Rng(derive_seed(*seed, {kSynthSeverity, i})).uniform()
                                               : det.severity(img.difficulty, q);
      const fs::path gt_rel = fs::path("gt") / (id + ".json");
      write_text_file(dir / gt_rel, polygons_to_json(img.gt, meta));
      const fs::path main_rel = fs::path("maps") / (id + ".pmap");
      save_probability_map(perturb_map(img.gt, severity, det.mixture, det, derive_seed(*seed, {kSynthMain, i})),
                           dir / main_rel);
      ManifestEntry e{id, img.gt.height, img.gt.width, {main_rel}, {}, gt_rel};
      single.entries.push_back(e);
      const auto members = perturb_ensemble_maps(img.gt, severity, det, derive_seed(*seed, {kSynthEnsemble, i}),
                                                 ensemble_size);
      e.maps.clear();
      for (std::size_t k = 0; k < members.size(); ++k) {
        const fs::path rel = fs::path("maps") / fmt::format("{}_m{}.pmap", id, k);
        save_probability_map(members[k], dir / rel);
        e.maps.push_back(rel);
      }
      ensemble.entries.push_back(std::move(e));
      truth += fmt::format("{},{},{}\n", id, num(img.difficulty), num(severity));
    }
    save_manifest(single, dir / "manifest.json", meta);
    save_manifest(ensemble, dir / "ensemble_manifest.json", meta);
    write_text_file(dir / "truth.csv", h.render() + truth);
    out << fmt::format("wrote {} synthetic image(s) to {}\n", corpus.size(), dir.string());
  }
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Confidence estimation for document object detection", "docconf"};
  app.set_version_flag("--version", std::string("docconf ") + kToolVersion);
  app.set_config("--config", "", "TOML/INI file with flag values (flags on the command line win)");
  app.require_subcommand(1);

  ExtractCmd extract;
  ScoreCmd score;
  ConfidenceCmd confidence;
  FeaturesCmd features;
  TrainCmd train;
  EvalCmd eval;
  RejectCmd reject;
  SelectCmd sel;
  SimulateCmd sim;
  SynthCmd synth;
  extract.attach(app);
  score.attach(app);
  confidence.attach(app);
  features.attach(app);
  train.attach(app);
  eval.attach(app);
  reject.attach(app);
  sel.attach(app);
  sim.attach(app);
  synth.attach(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    const auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "extract") extract.run(out);
    else if (name == "score") score.run(out);
    else if (name == "confidence") confidence.run(out);
    else if (name == "features") features.run(out);
    else if (name == "train-rfr") train.run(out);
    else if (name == "eval-rfr") eval.run(out);
    else if (name == "reject-curve") reject.run(out);
    else if (name == "al-select") sel.run(out, err);
    else if (name == "al-simulate") sim.run(out);
    else if (name == "synth") synth.run(out);
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace docconf::cli
