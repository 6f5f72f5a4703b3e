#include "docconf/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "docconf/error.hpp"
#include "docconf/rng.hpp"

namespace docconf {

void SyntheticDetectorConfig::validate() const {
  if (!(0.0 <= q_min && q_min <= q_max && q_max <= 1.0)) {
    throw InvalidArgument("detector quality must satisfy 0 <= q_min <= q_max <= 1");
  }
  if (!(kappa > 0.0)) throw InvalidArgument("kappa must be > 0");
  if (!(difficulty_lo >= 0.0 && difficulty_lo < difficulty_hi && difficulty_hi <= 1.0)) {
    throw InvalidArgument("difficulty range must satisfy 0 <= lo < hi <= 1");
  }
  if (!(difficulty_shape > 0.0)) throw InvalidArgument("difficulty shape must be > 0");
  if (!(informativeness_exponent >= 0.0)) throw InvalidArgument("informativeness exponent must be >= 0");
  if (mixture.jitter < 0 || mixture.fragmentation < 0 || mixture.miss < 0 || mixture.spurious < 0) {
    throw InvalidArgument("error mixture weights must be >= 0");
  }
  if (!(dropout_noise_scale >= 0.0)) throw InvalidArgument("dropout noise scale must be >= 0");
  if (image_height < 48 || image_width < 48) throw InvalidArgument("synthetic images must be at least 48x48");
  if (max_jitter_px < 0 || max_gap_px < 1 || max_spurious_rate < 0) {
    throw InvalidArgument("invalid corruption amplitudes");
  }
}

double SyntheticDetectorConfig::quality(double effective_labels) const {
  return q_min + (q_max - q_min) * (1.0 - std::exp(-std::max(effective_labels, 0.0) / kappa));
}

double SyntheticDetectorConfig::severity(double difficulty, double quality) const {
  return std::clamp(difficulty * (1.0 - quality), 0.0, 1.0);
}

double SyntheticDetectorConfig::informativeness(double difficulty) const {
  const double d = std::clamp((difficulty - difficulty_lo) / (difficulty_hi - difficulty_lo), 0.0, 1.0);
  const double g = informativeness_exponent;
  return (g + 1.0) * std::pow(d, g);
}

namespace {

std::vector<Polygon> page_layout(Rng& rng, int h, int w) {
  const int x0 = static_cast<int>(rng.between(3, 9));
  const int x1 = w - 1 - static_cast<int>(rng.between(3, 9));
  const int y0 = static_cast<int>(rng.between(3, 9));
  const int y1 = h - 1 - static_cast<int>(rng.between(3, 9));
  auto quad = [&](int a0, int a1) {
    const double s = 2.0;
    return Polygon({{a0 + std::round(rng.uniform(0, s)), y0 + std::round(rng.uniform(0, s))},
                    {a1 - std::round(rng.uniform(0, s)), y0 + std::round(rng.uniform(0, s))},
                    {a1 - std::round(rng.uniform(0, s)), y1 - std::round(rng.uniform(0, s))},
                    {a0 + std::round(rng.uniform(0, s)), y1 - std::round(rng.uniform(0, s))}});
  };
  if (rng.bernoulli(0.4)) {
    const int mid = (x0 + x1) / 2 + static_cast<int>(rng.between(-2, 2));
    return {quad(x0, mid - 3), quad(mid + 3, x1)};
  }
  return {quad(x0, x1)};
}

std::vector<Polygon> line_layout(Rng& rng, int h, int w) {
  std::vector<Polygon> lines;
  const int n = static_cast<int>(rng.between(3, 8));
  int y = static_cast<int>(rng.between(4, 10));
  for (int i = 0; i < n; ++i) {
    const int lh = static_cast<int>(rng.between(4, 6));
    if (y + lh - 1 > h - 4) break;
    const int x0 = static_cast<int>(rng.between(3, 12));
    const int len = static_cast<int>(rng.between(24, w - 4 - x0));
    lines.push_back(rect_polygon(Rect{x0, y, x0 + len - 1, y + lh - 1}));
    y += lh + static_cast<int>(rng.between(3, 7));
  }
  return lines;
}

// Chebyshev dilation of a window-local mask by r (separable max filter).
void dilate(std::vector<std::uint8_t>& m, int h, int w, int r) {
  if (r <= 0) return;
  std::vector<std::uint8_t> tmp(m.size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::uint8_t v = 0;
      for (int k = std::max(0, x - r); k <= std::min(w - 1, x + r) && !v; ++k) v = m[y * w + k];
      tmp[y * w + x] = v;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::uint8_t v = 0;
      for (int k = std::max(0, y - r); k <= std::min(h - 1, y + r) && !v; ++k) v = tmp[k * w + x];
      m[y * w + x] = v;
    }
  }
}

void erode(std::vector<std::uint8_t>& m, int h, int w, int r) {
  for (auto& b : m) b = !b;
  dilate(m, h, w, r);
  for (auto& b : m) b = !b;
}

// P(X <= k) >= u, X ~ Poisson(rate); a single uniform keeps the count
// monotone in the rate.
int poisson_quantile(double rate, double u) {
  if (rate <= 0.0) return 0;
  double p = std::exp(-rate), cdf = p;
  int k = 0;
  while (u > cdf && k < 1000) {
    ++k;
    p *= rate / k;
    cdf += p;
  }
  return k;
}

}  // namespace

std::vector<SyntheticImage> generate_corpus(std::size_t n, const SyntheticDetectorConfig& cfg,
                                            std::uint64_t seed, const std::string& id_prefix) {
  cfg.validate();
  std::vector<SyntheticImage> out;
  out.reserve(n);
  const int width_digits = std::max<int>(4, static_cast<int>(std::to_string(n).size()));
  for (std::size_t k = 0; k < n; ++k) {
    Rng rng(derive_seed(seed, {k}));
    SyntheticImage img;
    std::string num = std::to_string(k);
    num.insert(0, static_cast<std::size_t>(std::max(0, width_digits - static_cast<int>(num.size()))), '0');
    img.gt.image_id = id_prefix + "_" + num;
    img.gt.height = cfg.image_height;
    img.gt.width = cfg.image_width;
    img.gt.objects = rng.bernoulli(0.5) ? page_layout(rng, cfg.image_height, cfg.image_width)
                                        : line_layout(rng, cfg.image_height, cfg.image_width);
    img.difficulty = cfg.difficulty_lo + (cfg.difficulty_hi - cfg.difficulty_lo) *
                                             std::pow(rng.uniform(), cfg.difficulty_shape);
    out.push_back(std::move(img));
  }
  return out;
}

ProbabilityMap perturb_map(const GroundTruth& gt, double severity, const ErrorMixture& mix,
                           const SyntheticDetectorConfig& cfg, std::uint64_t seed) {
  const double s = std::clamp(severity, 0.0, 1.0);
  const int h = gt.height, w = gt.width;
  ProbabilityMap map(h, w);
  std::vector<float> canvas(static_cast<std::size_t>(h) * w, 0.0f);
  std::vector<std::uint8_t> fg(canvas.size(), 0);
  Rng ctl(seed);
  Rng pix(derive_seed(seed, {0xF1}));

  const double jitter_amp = mix.jitter * s * cfg.max_jitter_px;
  const double p_miss = std::min(1.0, mix.miss * s);
  const double p_frag = std::min(1.0, mix.fragmentation * s);
  const int gap = 1 + static_cast<int>(std::lround(s * (cfg.max_gap_px - 1)));

  std::vector<Rect> boxes;
  for (const Polygon& poly : gt.objects) {
    // Fixed number of control draws per object.
    const double u_miss = ctl.uniform(), u_r = ctl.uniform(), u_sign = ctl.uniform();
    const double u_frag = ctl.uniform(), u_pos = ctl.uniform();
    const ObjectMask om = rasterize_object(poly, h, w);
    if (om.count == 0) continue;
    boxes.push_back(om.box);
    if (u_miss < p_miss) continue;

    const int r = static_cast<int>(u_r * (std::floor(jitter_amp) + 1.0));
    const int pad = r + 1;
    const int lx0 = om.box.x_min - pad, ly0 = om.box.y_min - pad;
    const int lw = om.box.width() + 2 * pad, lh = om.box.height() + 2 * pad;
    std::vector<std::uint8_t> local(static_cast<std::size_t>(lw) * lh, 0);
    for (int y = 0; y < om.box.height(); ++y) {
      for (int x = 0; x < om.box.width(); ++x) {
        local[(y + pad) * lw + (x + pad)] = om.bits.at(y, x) ? 1 : 0;
      }
    }
    if (u_sign < 0.5) {
      dilate(local, lh, lw, r);
    } else {
      erode(local, lh, lw, r);
    }
    if (u_frag < p_frag) {
      // Cut across the longer axis.
      if (om.box.width() >= om.box.height()) {
        const int cx = pad + static_cast<int>((0.25 + 0.5 * u_pos) * om.box.width());
        for (int x = cx; x < std::min(lw, cx + gap); ++x) {
          for (int y = 0; y < lh; ++y) local[y * lw + x] = 0;
        }
      } else {
        const int cy = pad + static_cast<int>((0.25 + 0.5 * u_pos) * om.box.height());
        for (int y = cy; y < std::min(lh, cy + gap); ++y) {
          for (int x = 0; x < lw; ++x) local[y * lw + x] = 0;
        }
      }
    }
    for (int y = 0; y < lh; ++y) {
      for (int x = 0; x < lw; ++x) {
        const int gy = ly0 + y, gx = lx0 + x;
        if (!local[y * lw + x] || gy < 0 || gy >= h || gx < 0 || gx >= w) continue;
        fg[static_cast<std::size_t>(gy) * w + gx] = 1;
      }
    }
  }

  const int n_blobs = poisson_quantile(mix.spurious * s * cfg.max_spurious_rate, ctl.uniform());
  for (int b = 0; b < n_blobs; ++b) {
    const int bw = static_cast<int>(ctl.between(7, 12));
    const int bh = static_cast<int>(ctl.between(8, 12));
    Rect zone{0, 0, w - 1, h - 1};
    if (!boxes.empty()) {
      const Rect& near = boxes[static_cast<std::size_t>(ctl.below(boxes.size()))];
      zone = Rect{std::max(0, near.x_min - 12), std::max(0, near.y_min - 12),
                  std::min(w - 1, near.x_max + 12), std::min(h - 1, near.y_max + 12)};
    }
    const int x0 = static_cast<int>(ctl.between(zone.x_min, std::max(zone.x_min, zone.x_max - bw + 1)));
    const int y0 = static_cast<int>(ctl.between(zone.y_min, std::max(zone.y_min, zone.y_max - bh + 1)));
    for (int y = y0; y < std::min(h, y0 + bh); ++y) {
      for (int x = x0; x < std::min(w, x0 + bw); ++x) fg[static_cast<std::size_t>(y) * w + x] = 2;
    }
  }

  for (std::size_t i = 0; i < canvas.size(); ++i) {
    const double u = pix.uniform();
    double v;
    if (fg[i] == 1) {
      v = 1.0 - 0.5 * s * u;
    } else if (fg[i] == 2) {
      v = 0.5 + 0.5 * (1.0 - 0.5 * s) * u;
    } else {
      v = 0.45 * s * u;
    }
    canvas[i] = static_cast<float>(v);
  }
  return ProbabilityMap(h, w, std::move(canvas));
}

Prediction perturb_prediction(const GroundTruth& gt, double severity, const ErrorMixture& mixture,
                              const SyntheticDetectorConfig& cfg, std::uint64_t seed,
                              const PostprocessConfig& post) {
  return extract_objects(perturb_map(gt, severity, mixture, cfg, seed), post, gt.image_id);
}

std::vector<ProbabilityMap> perturb_ensemble_maps(const GroundTruth& gt, double severity,
                                                  const SyntheticDetectorConfig& cfg,
                                                  std::uint64_t seed, std::size_t n) {
  std::vector<ProbabilityMap> maps;
  maps.reserve(n);
  const double s = std::clamp(severity * cfg.dropout_noise_scale, 0.0, 1.0);
  for (std::size_t k = 0; k < n; ++k) {
    maps.push_back(perturb_map(gt, s, cfg.mixture, cfg, derive_seed(seed, {k})));
  }
  return maps;
}

DropoutEnsemble perturb_ensemble(const GroundTruth& gt, double severity,
                                 const SyntheticDetectorConfig& cfg, std::uint64_t seed,
                                 std::size_t n, const PostprocessConfig& post) {
  DropoutEnsemble e{gt.image_id, {}};
  for (const auto& m : perturb_ensemble_maps(gt, severity, cfg, seed, n)) {
    e.predictions.push_back(extract_objects(m, post, gt.image_id));
  }
  return e;
}

}  // namespace docconf
