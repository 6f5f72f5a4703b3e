#include <doctest.h>
#include <docconf/error.hpp>
#include <docconf/metrics.hpp>

#include "support.hpp"

using namespace docconf;
using oracle::Box;
using oracle::Scene;

TEST_CASE("default IoU grid") {
  const auto g = MapConfig::default_thresholds();
  REQUIRE(g.size() == 10);
  CHECK(g.front() == 0.5);
  CHECK(g[4] == 0.7);
  CHECK(g.back() == 0.95);
  MapConfig bad;
  bad.iou_thresholds = {0.5, 0.5};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad.iou_thresholds = {};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad.iou_thresholds = {0.0};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("pixel_iou examples") {
  Scene s;
  s.preds = {{{0, 0, 9, 9}, 1.0}};
  s.refs = {{0, 0, 9, 9}};
  CHECK(pixel_iou(oracle::to_prediction(s), oracle::to_ground_truth(s)) == 1.0);
  s.refs = {{20, 20, 29, 29}};
  CHECK(pixel_iou(oracle::to_prediction(s), oracle::to_ground_truth(s)) == 0.0);
  s.refs = {{5, 0, 14, 9}};
  CHECK(pixel_iou(oracle::to_prediction(s), oracle::to_ground_truth(s)) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  Scene empty;
  CHECK(pixel_iou(oracle::to_prediction(empty), oracle::to_ground_truth(empty)) == 1.0);
  empty.refs = {{0, 0, 3, 3}};
  CHECK(pixel_iou(oracle::to_prediction(empty), oracle::to_ground_truth(empty)) == 0.0);
}

TEST_CASE("pixel_iou uses the union of objects and is symmetric") {
  Rng rng(41);
  for (int t = 0; t < 200; ++t) {
    const Scene s = oracle::random_scene(rng);
    Scene swapped;
    for (const auto& b : s.refs) swapped.preds.push_back({b, 1.0});
    for (const auto& p : s.preds) swapped.refs.push_back(p.box);
    CHECK(pixel_iou(oracle::to_prediction(s), oracle::to_ground_truth(s)) ==
          pixel_iou(oracle::to_prediction(swapped), oracle::to_ground_truth(swapped)));
  }
}

TEST_CASE("dimension mismatch") {
  Scene s;
  s.preds = {{{0, 0, 3, 3}, 1.0}};
  s.refs = {{0, 0, 3, 3}};
  auto g = oracle::to_ground_truth(s);
  g.width = 41;
  CHECK_THROWS_AS(pixel_iou(oracle::to_prediction(s), g), DimensionMismatch);
  CHECK_THROWS_AS(mean_average_precision(oracle::to_prediction(s), g), DimensionMismatch);
}

TEST_CASE("match_objects examples") {
  Scene s;
  s.preds = {{{0, 0, 9, 9}, 0.9}};
  s.refs = {{0, 0, 9, 9}};
  auto m = match_objects(oracle::to_prediction(s), oracle::to_ground_truth(s), 0.5);
  CHECK(m.true_positives.size() == 1);
  CHECK(m.false_positives.empty());
  CHECK(m.false_negatives.empty());

  s.refs.clear();
  m = match_objects(oracle::to_prediction(s), oracle::to_ground_truth(s), 0.5);
  CHECK(m.true_positives.empty());
  CHECK(m.false_positives.size() == 1);
  CHECK(m.false_negatives.empty());

  // IoU 0.8 (80 of 100 px) and 0.6; equal probability, the larger ranks first.
  s.preds = {{{0, 0, 9, 7}, 0.7}, {{0, 0, 9, 5}, 0.7}};
  s.refs = {{0, 0, 9, 9}};
  m = match_objects(oracle::to_prediction(s), oracle::to_ground_truth(s), 0.5);
  REQUIRE(m.true_positives.size() == 1);
  CHECK(m.true_positives[0] == std::pair<int, int>{0, 0});
  CHECK(m.false_positives == std::vector<int>{1});
  CHECK(m.false_negatives.empty());

  // Listed second but ranked first on probability.
  s.preds = {{{0, 0, 9, 7}, 0.7}, {{0, 0, 9, 5}, 0.8}};
  m = match_objects(oracle::to_prediction(s), oracle::to_ground_truth(s), 0.5);
  REQUIRE(m.true_positives.size() == 1);
  CHECK(m.true_positives[0] == std::pair<int, int>{1, 0});
  CHECK(m.false_positives == std::vector<int>{0});
}

TEST_CASE("average_precision examples") {
  Scene s;
  s.preds = {{{0, 0, 9, 9}, 0.9}, {{20, 0, 29, 9}, 0.8}};
  s.refs = {{0, 0, 9, 9}, {20, 0, 29, 9}};
  for (double tau : {0.5, 0.75, 1.0}) {
    CHECK(average_precision(oracle::to_prediction(s), oracle::to_ground_truth(s), tau) == 1.0);
  }
  Scene empty_pred;
  empty_pred.refs = s.refs;
  CHECK(average_precision(oracle::to_prediction(empty_pred), oracle::to_ground_truth(empty_pred), 0.5) == 0.0);

  Scene fp_first;
  fp_first.refs = {{0, 0, 9, 9}, {20, 0, 29, 9}};
  fp_first.preds = {{{0, 25, 9, 34}, 0.9}, {{0, 0, 9, 9}, 0.5}};
  CHECK(average_precision(oracle::to_prediction(fp_first), oracle::to_ground_truth(fp_first), 0.5) == 0.25);
}

TEST_CASE("mean_average_precision examples") {
  Scene s;
  s.preds = {{{0, 0, 9, 6}, 0.9}};
  s.refs = {{0, 0, 9, 9}};
  CHECK(oracle::box_iou(s.preds[0].box, s.refs[0]) == 0.7);
  CHECK(mean_average_precision(oracle::to_prediction(s), oracle::to_ground_truth(s)) == 0.5);
  Scene empty;
  CHECK(mean_average_precision(oracle::to_prediction(empty), oracle::to_ground_truth(empty)) == 1.0);
  s.preds = {{{0, 0, 9, 9}, 0.9}};
  CHECK(mean_average_precision(oracle::to_prediction(s), oracle::to_ground_truth(s)) == 1.0);
}

TEST_CASE("average_precision matches the brute-force oracle") {
  Rng rng(2024);
  for (int t = 0; t < 300; ++t) {
    const Scene s = oracle::random_scene(rng);
    const auto p = oracle::to_prediction(s);
    const auto g = oracle::to_ground_truth(s);
    for (double tau : {0.3, 0.5, 0.65, 0.8, 0.95}) {
      REQUIRE(average_precision(p, g, tau) == doctest::Approx(oracle::average_precision(s, tau)).epsilon(1e-12));
    }
    REQUIRE(mean_average_precision(p, g) == doctest::Approx(oracle::mean_average_precision(s)).epsilon(1e-12));
  }
}

TEST_CASE("AP is non-increasing in tau and self-agreement is perfect") {
  Rng rng(77);
  for (int t = 0; t < 200; ++t) {
    const Scene s = oracle::random_scene(rng);
    const auto p = oracle::to_prediction(s);
    const auto g = oracle::to_ground_truth(s);
    double prev = 1.0;
    for (double tau = 0.05; tau <= 1.0; tau += 0.05) {
      const double ap = average_precision(p, g, tau);
      CHECK(ap <= prev + 1e-15);
      CHECK(ap >= 0.0);
      prev = ap;
    }
    CHECK(mean_average_precision(p, as_reference(p)) == 1.0);
  }
}

TEST_CASE("dataset_scores") {
  Scene perfect;
  perfect.preds = {{{0, 0, 9, 9}, 1.0}};
  perfect.refs = {{0, 0, 9, 9}};
  Scene miss;
  miss.refs = {{0, 0, 9, 9}};
  auto d = dataset_scores({oracle::to_prediction(perfect, "a")}, {oracle::to_ground_truth(perfect, "a")});
  CHECK(d.mean_map == 1.0);
  CHECK(d.mean_pixel_iou == 1.0);

  d = dataset_scores({oracle::to_prediction(perfect, "a"), oracle::to_prediction(miss, "b")},
                     {oracle::to_ground_truth(miss, "b"), oracle::to_ground_truth(perfect, "a")});
  REQUIRE(d.images.size() == 2);
  CHECK(d.images[0].image_id == "a");
  CHECK(d.mean_map == 0.5);
  CHECK(d.mean_pixel_iou == 0.5);

  Rng rng(5);
  std::vector<Prediction> preds;
  std::vector<GroundTruth> refs;
  double sum_map = 0, sum_iou = 0;
  for (int i = 0; i < 3; ++i) {
    const Scene s = oracle::random_scene(rng);
    const std::string id = "img" + std::to_string(i);
    preds.push_back(oracle::to_prediction(s, id));
    refs.push_back(oracle::to_ground_truth(s, id));
    const auto one = score_image(preds.back(), refs.back());
    sum_map += one.map;
    sum_iou += one.pixel_iou;
  }
  d = dataset_scores(preds, refs);
  CHECK(d.mean_map == doctest::Approx(sum_map / 3).epsilon(1e-15));
  CHECK(d.mean_pixel_iou == doctest::Approx(sum_iou / 3).epsilon(1e-15));

  try {
    dataset_scores({oracle::to_prediction(perfect, "a")}, {oracle::to_ground_truth(perfect, "z")});
    FAIL("expected an error");
  } catch (const InvalidArgument& e) {
    const std::string what = e.what();
    CHECK(what.find("a") != std::string::npos);
    CHECK(what.find("z") != std::string::npos);
  }
}
