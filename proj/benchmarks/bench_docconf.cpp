#include <benchmark/benchmark.h>
#include <docconf/estimators.hpp>
#include <docconf/evaluation.hpp>
#include <docconf/features.hpp>
#include <docconf/forest.hpp>
#include <docconf/metrics.hpp>
#include <docconf/postprocess.hpp>
#include <docconf/rng.hpp>
#include <docconf/synthetic.hpp>

using namespace docconf;

namespace {

const SyntheticImage& sample_image() {
  static const auto corpus = generate_corpus(1, SyntheticDetectorConfig{}, 42);
  return corpus.front();
}

RegressionDataset regression_rows(std::size_t n, std::size_t dims) {
  Rng rng(7);
  RegressionDataset d;
  for (std::size_t i = 0; i < n; ++i) {
    RegressionRow r{"r" + std::to_string(i), {}, 0.0};
    for (std::size_t k = 0; k < dims; ++k) r.x.push_back(rng.uniform());
    r.target = r.x[0] > 0.5 ? 0.8 : 0.2;
    d.push_back(std::move(r));
  }
  return d;
}

}  // namespace

static void BM_ExtractObjects(benchmark::State& state) {
  SyntheticDetectorConfig cfg;
  const auto map = perturb_map(sample_image().gt, static_cast<double>(state.range(0)) / 10.0, cfg.mixture, cfg, 1);
  for (auto _ : state) benchmark::DoNotOptimize(extract_objects(map, PostprocessConfig{}));
  state.SetItemsProcessed(state.iterations() * map.height() * map.width());
}
BENCHMARK(BM_ExtractObjects)->Arg(0)->Arg(5)->Arg(10);

static void BM_MeanAveragePrecision(benchmark::State& state) {
  SyntheticDetectorConfig cfg;
  const auto& gt = sample_image().gt;
  const auto pred = perturb_prediction(gt, static_cast<double>(state.range(0)) / 10.0, cfg.mixture, cfg, 2);
  for (auto _ : state) benchmark::DoNotOptimize(mean_average_precision(pred, gt));
}
BENCHMARK(BM_MeanAveragePrecision)->Arg(0)->Arg(5)->Arg(10);

static void BM_Dap(benchmark::State& state) {
  SyntheticDetectorConfig cfg;
  const auto ens = perturb_ensemble(sample_image().gt, 0.5, cfg, 3, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(dap(ens));
}
BENCHMARK(BM_Dap)->Arg(2)->Arg(10)->Arg(25)->Arg(50);

static void BM_ForestFit(benchmark::State& state) {
  const auto data = regression_rows(static_cast<std::size_t>(state.range(0)), 80);
  ForestParams p;
  p.n_trees = 20;
  for (auto _ : state) benchmark::DoNotOptimize(fit(data, p));
}
BENCHMARK(BM_ForestFit)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

static void BM_ForestPredict(benchmark::State& state) {
  const auto data = regression_rows(400, 80);
  const auto model = fit(data, ForestParams{});
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(predict(model, data[i++ % data.size()].x));
}
BENCHMARK(BM_ForestPredict);

static void BM_BootstrapBand(benchmark::State& state) {
  Rng rng(9);
  std::vector<ConfidenceScore> scores;
  std::vector<ImageScore> images;
  for (int i = 0; i < state.range(0); ++i) {
    const std::string id = "i" + std::to_string(i);
    scores.push_back({id, Estimator::Dap, rng.uniform(), true, false});
    images.push_back({id, rng.uniform(), rng.uniform()});
  }
  for (auto _ : state) benchmark::DoNotOptimize(bootstrap_band(scores, images, unit_threshold_grid(), 100, 1));
}
BENCHMARK(BM_BootstrapBand)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
