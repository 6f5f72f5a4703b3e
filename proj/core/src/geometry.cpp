#include "docconf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "docconf/error.hpp"

namespace docconf {

namespace {

constexpr double kEps = 1e-9;

double snap(double x) {
  const double r = std::round(x);
  return std::abs(x - r) < kEps ? r : x;
}

// x coordinate where edge (a, b) meets the horizontal line y; requires a.y != b.y.
double edge_x_at(const Point& a, const Point& b, double y) {
  return snap(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
}

bool on_segment(const Point& a, const Point& b, const Point& q) {
  const double cross = (b.x - a.x) * (q.y - a.y) - (b.y - a.y) * (q.x - a.x);
  const double scale = std::max({1.0, std::abs(b.x - a.x), std::abs(b.y - a.y)});
  if (std::abs(cross) > kEps * scale) return false;
  return q.x >= std::min(a.x, b.x) - kEps && q.x <= std::max(a.x, b.x) + kEps &&
         q.y >= std::min(a.y, b.y) - kEps && q.y <= std::max(a.y, b.y) + kEps;
}

}  // namespace

Rect make_rect(int x_min, int y_min, int x_max, int y_max) {
  if (x_min > x_max || y_min > y_max) {
    throw InvalidGeometry("rect has negative extent");
  }
  return Rect{x_min, y_min, x_max, y_max};
}

Polygon::Polygon(std::vector<Point> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 3) {
    throw InvalidGeometry("polygon needs at least 3 vertices, got " +
                          std::to_string(vertices_.size()));
  }
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    const Point& v = vertices_[i];
    if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
      throw InvalidGeometry("polygon vertex " + std::to_string(i) + " is not finite");
    }
    if (v == vertices_[(i + 1) % vertices_.size()]) {
      throw InvalidGeometry("polygon has consecutive duplicate vertex at index " +
                            std::to_string(i));
    }
  }
}

Polygon rect_polygon(const Rect& r) {
  const double x0 = r.x_min, y0 = r.y_min, x1 = r.x_max, y1 = r.y_max;
  if (r.x_min == r.x_max || r.y_min == r.y_max) {
    throw InvalidGeometry("rect polygon needs non-zero extent on both axes");
  }
  return Polygon({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
}

BinaryMask::BinaryMask(int height, int width) : height_(height), width_(width) {
  if (height < 0 || width < 0) throw InvalidArgument("mask dimensions must be non-negative");
  bits_.assign(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), 0);
}

std::size_t BinaryMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

double polygon_area(const Polygon& p) {
  const auto& v = p.vertices();
  const Point o = v.front();
  double twice = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point& a = v[i];
    const Point& b = v[(i + 1) % v.size()];
    twice += (a.x - o.x) * (b.y - o.y) - (b.x - o.x) * (a.y - o.y);
  }
  return std::abs(twice) * 0.5;
}

Rect bounding_rect(const Polygon& p) {
  double x0 = p.vertices().front().x, x1 = x0;
  double y0 = p.vertices().front().y, y1 = y0;
  for (const Point& v : p.vertices()) {
    x0 = std::min(x0, v.x);
    x1 = std::max(x1, v.x);
    y0 = std::min(y0, v.y);
    y1 = std::max(y1, v.y);
  }
  return Rect{static_cast<int>(std::floor(x0)), static_cast<int>(std::floor(y0)),
              static_cast<int>(std::ceil(x1)), static_cast<int>(std::ceil(y1))};
}

Point rect_centroid(const Rect& r) {
  return {(r.x_min + r.x_max) / 2.0, (r.y_min + r.y_max) / 2.0};
}

bool contains(const Polygon& p, const Point& q) {
  const auto& v = p.vertices();
  bool inside = false;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point& a = v[i];
    const Point& b = v[(i + 1) % v.size()];
    if (on_segment(a, b, q)) return true;
    if ((a.y <= q.y && q.y < b.y) || (b.y <= q.y && q.y < a.y)) {
      if (edge_x_at(a, b, q.y) > q.x) inside = !inside;
    }
  }
  return inside;
}

BinaryMask rasterize_in(const Polygon& p, const Rect& window) {
  BinaryMask mask(window.height(), window.width());
  const auto& v = p.vertices();
  const std::size_t n = v.size();
  const Rect box = bounding_rect(p);
  const int row_lo = std::max(window.y_min, box.y_min);
  const int row_hi = std::min(window.y_max, box.y_max);

  auto fill = [&](int row, double from, double to) {
    const int c0 = std::max(window.x_min, static_cast<int>(std::ceil(from - kEps)));
    const int c1 = std::min(window.x_max, static_cast<int>(std::floor(to + kEps)));
    for (int c = c0; c <= c1; ++c) mask.set(row - window.y_min, c - window.x_min);
  };

  std::vector<double> xs;
  for (int row = row_lo; row <= row_hi; ++row) {
    const double y = row;
    xs.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = v[i];
      const Point& b = v[(i + 1) % n];
      if (a.y == b.y) {
        if (a.y == y) fill(row, std::min(a.x, b.x), std::max(a.x, b.x));
        continue;
      }
      if (y < std::min(a.y, b.y) || y > std::max(a.y, b.y)) continue;
      const double x = edge_x_at(a, b, y);
      // Boundary pixels count as inside.
      if (x == std::round(x)) fill(row, x, x);
      if ((a.y <= y && y < b.y) || (b.y <= y && y < a.y)) xs.push_back(x);
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) fill(row, xs[k], xs[k + 1]);
  }
  return mask;
}

BinaryMask rasterize(const Polygon& p, int height, int width) {
  if (height < 1 || width < 1) throw InvalidArgument("rasterize needs height, width >= 1");
  return rasterize_in(p, Rect{0, 0, width - 1, height - 1});
}

}  // namespace docconf
