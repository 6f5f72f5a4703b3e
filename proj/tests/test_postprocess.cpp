#include <doctest.h>
#include <docconf/error.hpp>
#include <docconf/geometry.hpp>
#include <docconf/postprocess.hpp>
#include <docconf/rng.hpp>

#include <algorithm>

using namespace docconf;

namespace {

ProbabilityMap paint(int h, int w, std::initializer_list<std::pair<Rect, float>> blocks) {
  ProbabilityMap m(h, w);
  for (const auto& [r, v] : blocks) {
    for (int y = r.y_min; y <= r.y_max; ++y) {
      for (int x = r.x_min; x <= r.x_max; ++x) m.set(y, x, v);
    }
  }
  return m;
}

}  // namespace

TEST_CASE("ProbabilityMap validates values and size") {
  CHECK_THROWS_AS(ProbabilityMap(2, 2, {0.f, 0.5f, 1.f}), InvalidArgument);
  CHECK_THROWS_AS(ProbabilityMap(1, 2, {0.f, 1.5f}), InvalidArgument);
  CHECK_THROWS_AS(ProbabilityMap(1, 2, {0.f, -0.1f}), InvalidArgument);
  CHECK_NOTHROW(ProbabilityMap(1, 2, {0.f, 1.f}));
}

TEST_CASE("binarize examples") {
  PostprocessConfig cfg;
  CHECK(binarize(ProbabilityMap(4, 4), cfg).count() == 0);
  CHECK(binarize(ProbabilityMap(1, 1, {0.5f}), cfg).count() == 1);
  std::vector<float> v;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) v.push_back((r + c) % 2 ? 0.6f : 0.4f);
  }
  const BinaryMask m = binarize(ProbabilityMap(4, 4, v), cfg);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) CHECK(m.at(r, c) == ((r + c) % 2 == 1));
  }
}

TEST_CASE("PostprocessConfig validation") {
  PostprocessConfig cfg;
  cfg.connectivity = 6;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.binarize_threshold = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.min_area_px = -1;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}

TEST_CASE("connected_components examples") {
  const auto diag = binarize(paint(3, 3, {{make_rect(0, 0, 0, 0), 1.f}, {make_rect(1, 1, 1, 1), 1.f}}), {});
  CHECK(connected_components(diag, 8).size() == 1);
  CHECK(connected_components(diag, 4).size() == 2);
  ProbabilityMap dots(5, 10);
  for (int i = 0; i < 5; ++i) dots.set(i, 2 * i, 1.f);
  CHECK(connected_components(binarize(dots, {}), 4).size() == 5);
  CHECK(connected_components(binarize(dots, {}), 8).size() == 5);
}

TEST_CASE("components are ordered by their top-left-most pixel") {
  const auto m = binarize(paint(10, 10, {{make_rect(6, 0, 8, 1), 1.f}, {make_rect(0, 3, 1, 4), 1.f},
                                         {make_rect(0, 0, 2, 1), 1.f}}),
                          {});
  const auto comps = connected_components(m, 8);
  REQUIRE(comps.size() == 3);
  CHECK(comps[0].front() == 0);
  CHECK(comps[1].front() == 6);
  CHECK(comps[2].front() == 30);
  for (const auto& c : comps) CHECK(std::is_sorted(c.begin(), c.end()));
}

TEST_CASE("extract_objects area filter") {
  PostprocessConfig cfg;
  CHECK(extract_objects(paint(20, 20, {{make_rect(2, 2, 8, 8), 0.9f}}), cfg, "a").objects.empty());
  const auto kept = extract_objects(paint(20, 20, {{make_rect(2, 2, 11, 6), 0.9f}}), cfg, "a");
  REQUIRE(kept.objects.size() == 1);
  CHECK(kept.objects[0].pixel_area == 50);
}

TEST_CASE("extract_objects 10x10 square") {
  const auto p = extract_objects(paint(20, 20, {{make_rect(3, 4, 12, 13), 0.8f}}), {}, "sq");
  CHECK(p.image_id == "sq");
  CHECK(p.height == 20);
  CHECK(p.width == 20);
  REQUIRE(p.objects.size() == 1);
  const auto& o = p.objects[0];
  CHECK(o.pixel_area == 100);
  CHECK(o.mean_prob == doctest::Approx(0.8).epsilon(1e-7));
  CHECK(o.bbox == make_rect(3, 4, 12, 13));
  CHECK(o.bbox == bounding_rect(o.polygon));
  CHECK(polygon_area(o.polygon) == 81.0);
  CHECK(rasterize(o.polygon, 20, 20).count() == 100);
}

TEST_CASE("tiny components are always dropped") {
  PostprocessConfig cfg;
  cfg.min_area_px = 0;
  const auto p = extract_objects(paint(6, 6, {{make_rect(0, 0, 0, 0), 1.f}, {make_rect(3, 3, 4, 3), 1.f}}), cfg);
  CHECK(p.objects.empty());
  const auto q = extract_objects(paint(6, 6, {{make_rect(0, 0, 1, 0), 1.f}, {make_rect(1, 1, 1, 1), 1.f}}), cfg);
  REQUIRE(q.objects.size() == 1);
  CHECK(q.objects[0].pixel_area == 3);
}

TEST_CASE("contour of an L shape") {
  PostprocessConfig cfg;
  cfg.min_area_px = 0;
  const auto p = extract_objects(paint(6, 6, {{make_rect(1, 1, 1, 3), 1.f}, {make_rect(2, 3, 3, 3), 1.f}}), cfg);
  REQUIRE(p.objects.size() == 1);
  const auto& v = p.objects[0].polygon.vertices();
  CHECK(v.front() == Point{1, 1});
  CHECK(rasterize(p.objects[0].polygon, 6, 6).count() == 5);
}

namespace {

ProbabilityMap random_blobs(Rng& rng, int h, int w) {
  ProbabilityMap m(h, w);
  const int blobs = static_cast<int>(rng.between(1, 6));
  for (int b = 0; b < blobs; ++b) {
    const int cx = static_cast<int>(rng.between(0, w - 1)), cy = static_cast<int>(rng.between(0, h - 1));
    const int rx = static_cast<int>(rng.between(1, 9)), ry = static_cast<int>(rng.between(1, 9));
    for (int y = std::max(0, cy - ry); y <= std::min(h - 1, cy + ry); ++y) {
      for (int x = std::max(0, cx - rx); x <= std::min(w - 1, cx + rx); ++x) {
        const double d = double(x - cx) * (x - cx) / (rx * rx) + double(y - cy) * (y - cy) / (ry * ry);
        if (d <= 1.0) m.set(y, x, static_cast<float>(rng.uniform(0.5, 1.0)));
      }
    }
  }
  for (int i = 0; i < 30; ++i) {
    m.set(static_cast<int>(rng.below(h)), static_cast<int>(rng.below(w)), static_cast<float>(rng.uniform()));
  }
  return m;
}

}  // namespace

TEST_CASE("extract_objects accounting and membership") {
  Rng rng(21);
  for (int t = 0; t < 100; ++t) {
    const int h = 40, w = 50;
    const auto m = random_blobs(rng, h, w);
    PostprocessConfig cfg;
    cfg.min_area_px = static_cast<long long>(rng.between(0, 60));
    cfg.connectivity = rng.bernoulli(0.5) ? 4 : 8;
    const auto mask = binarize(m, cfg);
    const auto comps = connected_components(mask, cfg.connectivity);
    const auto p = extract_objects(m, cfg);
    long long kept = 0, filtered = 0;
    for (const auto& c : comps) {
      for (int i : c) CHECK(m.values()[static_cast<std::size_t>(i)] >= cfg.binarize_threshold);
      const auto n = static_cast<long long>(c.size());
      if (n >= std::max<long long>(cfg.min_area_px, 3)) {
        kept += n;
      } else {
        filtered += n;
      }
    }
    long long areas = 0;
    for (const auto& o : p.objects) {
      areas += o.pixel_area;
      CHECK(o.pixel_area >= cfg.min_area_px);
      CHECK(o.mean_prob >= 0.0);
      CHECK(o.mean_prob <= 1.0);
      CHECK(o.bbox == bounding_rect(o.polygon));
    }
    CHECK(areas == kept);
    const long long background = static_cast<long long>(h) * w - static_cast<long long>(mask.count());
    CHECK(areas + filtered + background == static_cast<long long>(h) * w);
  }
}

TEST_CASE("re-extracting rasterized contours is stable") {
  Rng rng(22);
  for (int t = 0; t < 100; ++t) {
    const int h = 40, w = 50;
    PostprocessConfig cfg;
    cfg.min_area_px = 10;
    const auto p = extract_objects(random_blobs(rng, h, w), cfg);
    ProbabilityMap again(h, w);
    for (const auto& o : p.objects) {
      const auto m = rasterize(o.polygon, h, w);
      for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
          if (m.at(r, c)) again.set(r, c, 1.f);
        }
      }
    }
    const auto q = extract_objects(again, cfg);
    REQUIRE(q.objects.size() == p.objects.size());
    for (std::size_t i = 0; i < p.objects.size(); ++i) {
      const auto& a = p.objects[i];
      const auto perimeter = 2 * (a.bbox.width() + a.bbox.height());
      CHECK(std::abs(q.objects[i].pixel_area - a.pixel_area) <= perimeter);
    }
  }
}
