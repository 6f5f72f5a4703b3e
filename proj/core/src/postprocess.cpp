#include "docconf/postprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "docconf/error.hpp"

namespace docconf {

namespace {

// Clockwise on screen (y grows downwards), starting east.
constexpr std::array<int, 8> kDx = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr std::array<int, 8> kDy = {0, 1, 1, 1, 0, -1, -1, -1};

int direction_of(int dx, int dy) {
  for (int d = 0; d < 8; ++d) {
    if (kDx[d] == dx && kDy[d] == dy) return d;
  }
  return -1;
}

}  // namespace

ProbabilityMap::ProbabilityMap(int height, int width, std::vector<float> values)
    : height_(height), width_(width), values_(std::move(values)) {
  if (height < 1 || width < 1) throw InvalidArgument("probability map needs height, width >= 1");
  if (values_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
    throw InvalidArgument("probability map has " + std::to_string(values_.size()) +
                          " values, expected " + std::to_string(height) + "x" +
                          std::to_string(width));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] >= 0.0f && values_[i] <= 1.0f)) {
      throw InvalidArgument("probability at index " + std::to_string(i) + " outside [0,1]");
    }
  }
}

ProbabilityMap::ProbabilityMap(int height, int width)
    : ProbabilityMap(height, width,
                     std::vector<float>(static_cast<std::size_t>(std::max(height, 0)) *
                                            static_cast<std::size_t>(std::max(width, 0)),
                                        0.0f)) {}

void ProbabilityMap::set(int row, int col, float v) {
  if (!(v >= 0.0f && v <= 1.0f)) throw InvalidArgument("probability outside [0,1]");
  values_[static_cast<std::size_t>(row) * width_ + col] = v;
}

void PostprocessConfig::validate() const {
  if (!(binarize_threshold > 0.0 && binarize_threshold < 1.0)) {
    throw InvalidArgument("binarize threshold must lie in (0,1)");
  }
  if (connectivity != 4 && connectivity != 8) {
    throw InvalidArgument("connectivity must be 4 or 8");
  }
  if (min_area_px < 0) throw InvalidArgument("min area must be >= 0");
}

BinaryMask binarize(const ProbabilityMap& m, const PostprocessConfig& cfg) {
  BinaryMask mask(m.height(), m.width());
  const auto& v = m.values();
  auto bits = mask.bits();
  for (std::size_t i = 0; i < v.size(); ++i) bits[i] = v[i] >= cfg.binarize_threshold ? 1 : 0;
  return mask;
}

std::vector<std::vector<int>> connected_components(const BinaryMask& m, int connectivity) {
  if (connectivity != 4 && connectivity != 8) {
    throw InvalidArgument("connectivity must be 4 or 8");
  }
  const int h = m.height(), w = m.width();
  std::vector<int> label(m.size(), -1);
  std::vector<std::vector<int>> components;
  std::vector<int> stack;
  for (int start = 0; start < static_cast<int>(m.size()); ++start) {
    if (!m[start] || label[start] >= 0) continue;
    const int id = static_cast<int>(components.size());
    std::vector<int>& comp = components.emplace_back();
    label[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      comp.push_back(cur);
      const int r = cur / w, c = cur % w;
      for (int d = 0; d < 8; ++d) {
        if (connectivity == 4 && (d % 2) == 1) continue;
        const int rr = r + kDy[d], cc = c + kDx[d];
        if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
        const int nb = rr * w + cc;
        if (m[nb] && label[nb] < 0) {
          label[nb] = id;
          stack.push_back(nb);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
  }
  return components;
}

std::vector<Point> trace_outer_border(const std::vector<int>& pixels, int height, int width) {
  if (pixels.empty()) throw InvalidArgument("cannot trace an empty pixel set");
  int r0 = height, r1 = -1, c0 = width, c1 = -1;
  for (int px : pixels) {
    const int r = px / width, c = px % width;
    r0 = std::min(r0, r);
    r1 = std::max(r1, r);
    c0 = std::min(c0, c);
    c1 = std::max(c1, c);
  }
  // Window with a one-pixel background margin.
  const int ww = c1 - c0 + 3, wh = r1 - r0 + 3;
  std::vector<std::uint8_t> in(static_cast<std::size_t>(ww) * wh, 0);
  for (int px : pixels) in[(px / width - r0 + 1) * ww + (px % width - c0 + 1)] = 1;
  auto member = [&](int x, int y) { return in[static_cast<std::size_t>(y) * ww + x] != 0; };

  const int start = *std::min_element(pixels.begin(), pixels.end());
  const int sx = start % width - c0 + 1, sy = start / width - r0 + 1;

  std::vector<Point> contour{{static_cast<double>(sx), static_cast<double>(sy)}};
  int px = sx, py = sy;
  int back = 4;  // west neighbour of the first pixel is background
  int first_x = -1, first_y = -1;
  const std::size_t cap = 4 * pixels.size() + 8;
  for (std::size_t step = 0; step < cap; ++step) {
    int qx = -1, qy = -1, d = -1;
    for (int k = 1; k <= 8; ++k) {
      const int dd = (back + k) % 8;
      if (member(px + kDx[dd], py + kDy[dd])) {
        qx = px + kDx[dd];
        qy = py + kDy[dd];
        d = dd;
        break;
      }
    }
    if (d < 0) break;  // isolated pixel
    if (step == 0) {
      first_x = qx;
      first_y = qy;
    } else if (px == sx && py == sy && qx == first_x && qy == first_y) {
      contour.pop_back();  // the start pixel again; closure is implicit
      break;
    }
    const int prev = (d + 7) % 8;
    back = direction_of(px + kDx[prev] - qx, py + kDy[prev] - qy);
    px = qx;
    py = qy;
    contour.push_back({static_cast<double>(px), static_cast<double>(py)});
  }
  for (Point& p : contour) {
    p.x += c0 - 1;
    p.y += r0 - 1;
  }
  return contour;
}

Prediction extract_objects(const ProbabilityMap& m, const PostprocessConfig& cfg,
                           std::string image_id) {
  cfg.validate();
  Prediction pred;
  pred.image_id = std::move(image_id);
  pred.height = m.height();
  pred.width = m.width();
  const long long min_area = std::max<long long>(cfg.min_area_px, 3);
  const auto& values = m.values();
  for (const auto& comp : connected_components(binarize(m, cfg), cfg.connectivity)) {
    if (static_cast<long long>(comp.size()) < min_area) continue;
    double sum = 0.0;
    for (int px : comp) sum += values[px];
    Polygon poly(trace_outer_border(comp, m.height(), m.width()));
    const Rect box = bounding_rect(poly);
    pred.objects.push_back(DetectedObject{std::move(poly), box,
                                          static_cast<long long>(comp.size()),
                                          sum / static_cast<double>(comp.size())});
  }
  return pred;
}

}  // namespace docconf
