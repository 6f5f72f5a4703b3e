#include <doctest.h>
#include <docconf/error.hpp>
#include <docconf/estimators.hpp>

#include <algorithm>

#include "support.hpp"

using namespace docconf;
using oracle::Scene;

namespace {

Prediction with_probs(std::initializer_list<double> probs) {
  Scene s;
  int x = 0;
  for (double p : probs) {
    s.preds.push_back({{x, 0, x + 4, 4}, p});
    x += 7;
  }
  return oracle::to_prediction(s, "p");
}

Prediction with_count(int n) {
  Scene s;
  for (int i = 0; i < n; ++i) s.preds.push_back({{(i % 5) * 8, (i / 5) * 8, (i % 5) * 8 + 5, (i / 5) * 8 + 5}, 0.9});
  return oracle::to_prediction(s, "e");
}

DropoutEnsemble counts(std::initializer_list<int> ns) {
  DropoutEnsemble e{"e", {}};
  for (int n : ns) e.predictions.push_back(with_count(n));
  return e;
}

}  // namespace

TEST_CASE("estimator names") {
  CHECK(parse_estimator("PCE") == Estimator::Pce);
  CHECK(parse_estimator("map-rfr") == Estimator::MapRfr);
  CHECK(to_string(Estimator::Dov) == "dov");
  CHECK_THROWS_AS(parse_estimator("entropy"), InvalidArgument);
  CHECK_FALSE(higher_is_confident(Estimator::Dov));
  CHECK(higher_is_confident(Estimator::Dap));
}

TEST_CASE("pce examples") {
  CHECK(pce(with_probs({0.9})).value == 0.9);
  CHECK(pce(with_probs({0.8, 0.6})).value == doctest::Approx(0.7).epsilon(1e-15));
  const auto empty = pce(with_probs({}));
  CHECK(empty.value == 0.0);
  CHECK(empty.conventional);
  CHECK_FALSE(pce(with_probs({0.3})).conventional);
  CHECK(pce(with_probs({0.3})).higher_is_confident);
}

TEST_CASE("dap examples") {
  const auto a = with_count(3);
  CHECK(dap(DropoutEnsemble{"x", {a, a, a, a}}).value == 1.0);
  CHECK(dap(DropoutEnsemble{"x", {with_count(1), with_count(0)}}).value == 0.0);
  Scene far;
  far.preds = {{{30, 30, 38, 38}, 0.9}};
  const auto c = oracle::to_prediction(far, "p");
  const auto b = with_count(1);
  CHECK(dap(DropoutEnsemble{"x", {b, b, c}}).value == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(dap(DropoutEnsemble{"x", {with_count(0), with_count(0)}}).value == 1.0);
}

TEST_CASE("dap and dov require two members of equal size") {
  CHECK_THROWS_AS(dap(DropoutEnsemble{"x", {with_count(1)}}), InsufficientEnsemble);
  CHECK_THROWS_AS(dov(DropoutEnsemble{"x", {with_count(1)}}), InsufficientEnsemble);
  CHECK_THROWS_AS(dap(DropoutEnsemble{"x", {}}), InsufficientEnsemble);
  auto odd = with_count(1);
  odd.width = 41;
  CHECK_THROWS_AS(dap(DropoutEnsemble{"x", {with_count(1), odd}}), DimensionMismatch);
  CHECK_THROWS_AS(dov(DropoutEnsemble{"x", {with_count(1), odd}}), DimensionMismatch);
}

TEST_CASE("dov examples") {
  CHECK(dov(counts({3, 3, 3})).value == 0.0);
  CHECK(dov(counts({1, 5})).value == 4.0);
  CHECK(dov(counts({2, 2, 2, 6})).value == 3.0);
  CHECK_FALSE(dov(counts({1, 5})).higher_is_confident);
}

TEST_CASE("dap equals the ordered-pair enumeration") {
  Rng rng(8);
  for (std::size_t n : {2u, 5u, 10u, 25u}) {
    for (int t = 0; t < 10; ++t) {
      DropoutEnsemble e{"ens", oracle::random_ensemble(rng, n)};
      CHECK(dap(e).value == oracle::dap_ordered_pairs(e.predictions));
    }
  }
}

TEST_CASE("permutation invariance") {
  Rng rng(99);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = static_cast<std::size_t>(rng.between(2, 6));
    DropoutEnsemble e{"ens", oracle::random_ensemble(rng, n)};
    DropoutEnsemble shuffled = e;
    rng.shuffle(shuffled.predictions);
    const double d = dap(e).value;
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
    CHECK(dap(shuffled).value == doctest::Approx(d).epsilon(1e-12));
    CHECK(dov(shuffled).value == doctest::Approx(dov(e).value).epsilon(1e-12));

    auto p = e.predictions.front();
    const double base = pce(p).value;
    rng.shuffle(p.objects);
    CHECK(pce(p).value == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("dov is zero exactly when counts agree") {
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    const int n = static_cast<int>(rng.between(2, 6));
    DropoutEnsemble e{"e", {}};
    std::vector<int> cs;
    for (int i = 0; i < n; ++i) {
      cs.push_back(static_cast<int>(rng.between(0, 3)));
      e.predictions.push_back(with_count(cs.back()));
    }
    const bool equal = std::all_of(cs.begin(), cs.end(), [&](int c) { return c == cs.front(); });
    CHECK((dov(e).value == 0.0) == equal);
  }
}
