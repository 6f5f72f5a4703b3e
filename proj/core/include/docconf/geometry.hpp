#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace docconf {

// Coordinates: origin top-left, x = column, y = row. Pixel (c, r) has its
// center at (c, r).

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Axis-aligned rectangle with inclusive integer-pixel bounds.
struct Rect {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  int width() const noexcept { return x_max - x_min + 1; }
  int height() const noexcept { return y_max - y_min + 1; }
  long long area() const noexcept { return static_cast<long long>(width()) * height(); }
  bool contains(const Point& p) const noexcept {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }

  friend bool operator==(const Rect&, const Rect&) = default;
};

/// Throws InvalidGeometry unless x_min <= x_max and y_min <= y_max.
Rect make_rect(int x_min, int y_min, int x_max, int y_max);

/// Closed ring with implicit closure. At least three vertices, all finite, no
/// two consecutive vertices equal (the last and first count as consecutive).
class Polygon {
 public:
  explicit Polygon(std::vector<Point> vertices);

  const std::vector<Point>& vertices() const noexcept { return vertices_; }
  std::size_t size() const noexcept { return vertices_.size(); }

  friend bool operator==(const Polygon&, const Polygon&) = default;

 private:
  std::vector<Point> vertices_;
};

/// Axis-aligned rectangle polygon with corners at the given pixel centers.
Polygon rect_polygon(const Rect& r);

/// Row-major boolean grid.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int height, int width);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t size() const noexcept { return bits_.size(); }

  bool at(int row, int col) const noexcept {
    return bits_[static_cast<std::size_t>(row) * width_ + col] != 0;
  }
  void set(int row, int col, bool v = true) noexcept {
    bits_[static_cast<std::size_t>(row) * width_ + col] = v ? 1 : 0;
  }
  bool operator[](std::size_t i) const noexcept { return bits_[i] != 0; }

  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  std::span<std::uint8_t> bits() noexcept { return bits_; }

  std::size_t count() const noexcept;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Absolute shoelace area in square pixels.
double polygon_area(const Polygon& p);

/// Tightest integer rectangle containing every vertex (min floored, max ceiled).
Rect bounding_rect(const Polygon& p);

Point rect_centroid(const Rect& r);

/// Even-odd point-in-polygon test; points on an edge count as inside.
bool contains(const Polygon& p, const Point& q);

/// Pixel (c, r) is set iff its center lies inside or on the polygon. Pixels
/// outside the image are clipped.
BinaryMask rasterize(const Polygon& p, int height, int width);

/// Rasterization restricted to a window. Returns the pixels of the polygon that
/// fall inside `window` as a window-local mask (row-major, window.height() x
/// window.width()).
BinaryMask rasterize_in(const Polygon& p, const Rect& window);

}  // namespace docconf
