#include <doctest.h>
#include <docconf/error.hpp>
#include <docconf/forest.hpp>
#include <docconf/rng.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "support.hpp"

using namespace docconf;

namespace {

using oracle::step_data;

ForestParams params(int trees, std::uint64_t seed = 1) {
  ForestParams p;
  p.n_trees = trees;
  p.seed = seed;
  return p;
}

RegressionTree leaf(double v) {
  RegressionTree t;
  t.nodes.push_back({-1, 0.0, -1, -1, v});
  return t;
}

}  // namespace

TEST_CASE("params validation") {
  ForestParams p;
  p.n_trees = 0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = {};
  p.min_samples_split = 1;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = {};
  p.min_samples_leaf = 0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  CHECK_THROWS_AS(fit({}, params(3)), InvalidArgument);
  RegressionDataset ragged{{"a", {0.1, 0.2}, 0.5}, {"b", {0.1}, 0.5}};
  CHECK_THROWS_AS(fit(ragged, params(3)), LengthMismatch);
}

TEST_CASE("constant targets") {
  auto d = step_data(1, 50);
  for (auto& r : d) r.target = 0.7;
  const auto m = fit(d, params(20));
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    CHECK(predict(m, std::vector<double>{rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()}) == 0.7);
  }
  for (const auto& t : m.trees()) CHECK(t.nodes.size() == 1);
}

TEST_CASE("single row") {
  const RegressionDataset d{{"only", {0.3, 0.9}, 0.42}};
  const auto m = fit(d, params(10));
  for (const auto& t : m.trees()) {
    REQUIRE(t.nodes.size() == 1);
    CHECK(t.nodes[0].value == 0.42);
  }
  CHECK(predict(m, std::vector<double>{5.0, -1.0}) == 0.42);
}

TEST_CASE("step function is learned") {
  const auto train = step_data(11, 200);
  const auto test = step_data(12, 500);
  const auto m = fit(train, params(100, 3));
  CHECK(mse(m, test) < 0.01);
  CHECK(m.oob_mse().has_value());
}

TEST_CASE("hand-built models") {
  const ForestModel two(params(2), {}, 1, {leaf(0.4), leaf(0.8)}, 0.4, 0.8);
  CHECK(predict(two, std::vector<double>{0.0}) == doctest::Approx(0.6).epsilon(1e-15));

  RegressionTree split;
  split.nodes = {{0, 0.5, 1, 2, 0.6}, {-1, 0.0, -1, -1, 0.2}, {-1, 0.0, -1, -1, 0.9}};
  CHECK(split.predict({0.5}) == 0.2);
  CHECK(split.predict({0.50001}) == 0.9);
  const ForestModel same(params(3), {}, 1, {split, split, split}, 0.2, 0.9);
  CHECK(predict(same, std::vector<double>{0.1}) == split.predict({0.1}));
  CHECK(predict(same, std::vector<double>{0.7}) == split.predict({0.7}));
}

TEST_CASE("mse") {
  const ForestModel zero(params(1), {}, 1, {leaf(0.0)}, 0.0, 0.0);
  CHECK(mse(zero, {{"a", {0.1}, 1.0}, {"b", {0.2}, 1.0}}) == 1.0);
  CHECK(mse(zero, {{"a", {0.1}, 0.0}}) == 0.0);
  const ForestModel half(params(1), {}, 1, {leaf(0.5)}, 0.5, 0.5);
  CHECK(mse(half, {{"a", {0.0}, 0.1}, {"b", {0.0}, 0.9}, {"c", {0.0}, 0.5}}) ==
        doctest::Approx((0.16 + 0.16 + 0.0) / 3).epsilon(1e-12));
  CHECK_THROWS_AS(mse(half, {}), InvalidArgument);
}

TEST_CASE("determinism and bounds") {
  const auto d = step_data(21, 150, 6, 0.1);
  ForestParams p = params(30, 77);
  p.features_per_split = 2;
  const auto a = fit(d, p);
  const auto b = fit(d, p);
  const auto c = fit(d, p, {}, 3);
  p.seed = 78;
  const auto other = fit(d, p);
  double lo = 1, hi = 0;
  for (const auto& r : d) {
    lo = std::min(lo, r.target);
    hi = std::max(hi, r.target);
  }
  Rng rng(5);
  bool differs = false;
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x;
    for (int k = 0; k < 6; ++k) x.push_back(rng.uniform(-0.5, 1.5));
    const double y = predict(a, x);
    CHECK(y == predict(b, x));
    CHECK(y == predict(c, x));
    CHECK(y >= lo);
    CHECK(y <= hi);
    differs |= y != predict(other, x);
  }
  CHECK(differs);
  for (const auto& t : a.trees()) {
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
      const auto& n = t.nodes[i];
      if (n.feature < 0) {
        CHECK(n.value >= lo);
        CHECK(n.value <= hi);
      } else {
        CHECK(n.left > static_cast<int>(i));
        CHECK(n.right > static_cast<int>(i));
      }
    }
  }
}

TEST_CASE("depth and leaf size limits") {
  const auto d = step_data(4, 120, 3, 0.2);
  ForestParams p = params(5);
  p.max_depth = 2;
  const auto shallow = fit(d, p);
  for (const auto& t : shallow.trees()) CHECK(t.nodes.size() <= 7);
  p = params(5);
  p.min_samples_leaf = 200;
  const auto stump = fit(d, p);
  for (const auto& t : stump.trees()) CHECK(t.nodes.size() == 1);
}

TEST_CASE("out-of-bag error shrinks with more trees") {
  int improved = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto d = step_data(100 + seed, 200, 4, 0.1);
    const auto one = fit(d, params(1, seed));
    const auto many = fit(d, params(100, seed));
    REQUIRE(one.oob_mse().has_value());
    REQUIRE(many.oob_mse().has_value());
    improved += *many.oob_mse() < *one.oob_mse();
  }
  CHECK(improved >= 4);
}

TEST_CASE("serialization round-trip") {
  const auto d = step_data(8, 80, 80, 0.05);
  const auto m = fit(d, params(12, 5));
  const auto bytes = serialize(m);
  const auto back = deserialize(bytes);
  CHECK(serialize(back) == bytes);
  CHECK(back.params().n_trees == 12);
  CHECK(back.params().seed == 5);
  CHECK(back.n_inputs() == 80);
  CHECK(back.feature_config().fingerprint() == m.feature_config().fingerprint());
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x(80);
    for (auto& v : x) v = rng.uniform();
    CHECK(predict(back, x) == predict(m, x));
  }

  const auto path = std::filesystem::temp_directory_path() / "docconf_forest_roundtrip.bin";
  save(m, path);
  CHECK(serialize(load(path)) == bytes);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load(path), Error);
}

TEST_CASE("corrupt model files") {
  const auto m = fit(step_data(8, 40, 80), params(3));
  const auto bytes = serialize(m);
  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{20}, bytes.size() / 2, bytes.size() - 1}) {
    CHECK_THROWS_AS(deserialize(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + static_cast<long>(cut))),
                    ParseError);
  }
  auto flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x40;
  CHECK_THROWS_AS(deserialize(flipped), ParseError);
  auto magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_WITH_AS(deserialize(magic), doctest::Contains("magic"), ParseError);
  auto version = bytes;
  version[4] = 9;
  CHECK_THROWS_WITH_AS(deserialize(version), doctest::Contains("version"), ParseError);
  auto trailing = bytes;
  trailing.push_back(0);
  CHECK_THROWS_AS(deserialize(trailing), ParseError);
}

TEST_CASE("feature length is checked") {
  const auto m = fit(step_data(8, 40, 80), params(3));
  CHECK_THROWS_AS(predict(m, std::vector<double>(128, 0.1)), LengthMismatch);
  CHECK_THROWS_AS(predict(m, FeatureVector{"x", std::vector<double>(128, 0.1)}), LengthMismatch);
  CHECK_NOTHROW(predict(m, std::vector<double>(80, 0.1)));
}
