#pragma once

// Window-level augmentation: one rotation, one crop and one photometric
// jitter drawn per window and applied identically to all of its frames.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "jerseyid/common.hpp"
#include "jerseyid/weaklabel/sampling.hpp"

namespace jerseyid::weak {

struct AugmentConfig {
  std::size_t crop_height = 28;
  std::size_t crop_width = 28;
  double max_rotation_deg = 10.0;
  std::size_t max_crop_shift = 2;  // crop origin offset from centre, per axis
  double brightness_jitter = 0.1;  // additive, uniform in [-j, j]
  double contrast_jitter = 0.2;    // multiplicative about 0.5, uniform in [1-j, 1+j]

  static AugmentConfig none(std::size_t crop_h, std::size_t crop_w) {
    return {crop_h, crop_w, 0.0, 0, 0.0, 0.0};
  }
};

struct AugmentParams {
  double rotation_deg = 0.0;
  std::size_t crop_row = 0;
  std::size_t crop_col = 0;
  double brightness = 0.0;
  double contrast = 1.0;

  friend bool operator==(const AugmentParams&, const AugmentParams&) = default;
};

namespace detail {

inline void check_crop(const AugmentConfig& cfg, const Frame& f) {
  if (cfg.crop_height > f.height || cfg.crop_width > f.width || cfg.crop_height == 0 ||
      cfg.crop_width == 0) {
    throw std::invalid_argument("augment: crop " + std::to_string(cfg.crop_height) + "x" +
                                std::to_string(cfg.crop_width) + " does not fit frame " +
                                std::to_string(f.height) + "x" + std::to_string(f.width));
  }
}

inline std::size_t shifted_origin(std::size_t centre, std::size_t limit, long shift) {
  const long v = static_cast<long>(centre) + shift;
  return static_cast<std::size_t>(std::clamp(v, 0L, static_cast<long>(limit)));
}

/// Bilinear sample with edge replication outside the frame.
inline float sample_clamped(const Frame& f, double y, double x, std::size_t ch) {
  const double yc = std::clamp(y, 0.0, static_cast<double>(f.height - 1));
  const double xc = std::clamp(x, 0.0, static_cast<double>(f.width - 1));
  const auto y0 = static_cast<std::size_t>(std::floor(yc));
  const auto x0 = static_cast<std::size_t>(std::floor(xc));
  const std::size_t y1 = std::min(y0 + 1, f.height - 1), x1 = std::min(x0 + 1, f.width - 1);
  const double fy = yc - static_cast<double>(y0), fx = xc - static_cast<double>(x0);
  const double top = (1 - fx) * f.at(y0, x0, ch) + fx * f.at(y0, x1, ch);
  const double bot = (1 - fx) * f.at(y1, x0, ch) + fx * f.at(y1, x1, ch);
  return static_cast<float>((1 - fy) * top + fy * bot);
}

}  // namespace detail

inline AugmentParams draw_augment_params(const AugmentConfig& cfg, const Frame& proto, Rng& rng) {
  detail::check_crop(cfg, proto);
  AugmentParams p;
  p.rotation_deg =
      cfg.max_rotation_deg > 0 ? uniform(rng, -cfg.max_rotation_deg, cfg.max_rotation_deg) : 0.0;
  const std::size_t rmax = proto.height - cfg.crop_height, cmax = proto.width - cfg.crop_width;
  const long s = static_cast<long>(cfg.max_crop_shift);
  const long dr = s > 0 ? static_cast<long>(uniform_index(rng, 2 * s + 1)) - s : 0;
  const long dc = s > 0 ? static_cast<long>(uniform_index(rng, 2 * s + 1)) - s : 0;
  p.crop_row = detail::shifted_origin(rmax / 2, rmax, dr);
  p.crop_col = detail::shifted_origin(cmax / 2, cmax, dc);
  p.brightness =
      cfg.brightness_jitter > 0 ? uniform(rng, -cfg.brightness_jitter, cfg.brightness_jitter) : 0.0;
  p.contrast = cfg.contrast_jitter > 0
                   ? uniform(rng, 1.0 - cfg.contrast_jitter, 1.0 + cfg.contrast_jitter)
                   : 1.0;
  return p;
}

inline Frame apply_augment(const Frame& f, const AugmentConfig& cfg, const AugmentParams& p) {
  detail::check_crop(cfg, f);
  if (p.crop_row + cfg.crop_height > f.height || p.crop_col + cfg.crop_width > f.width) {
    throw std::invalid_argument("augment: crop origin out of range");
  }
  Frame out(cfg.crop_height, cfg.crop_width, f.channels);
  const double theta = p.rotation_deg * std::numbers::pi / 180.0;
  const double ct = std::cos(theta), st = std::sin(theta);
  const double cy = (static_cast<double>(f.height) - 1) / 2.0;
  const double cx = (static_cast<double>(f.width) - 1) / 2.0;
  const bool photometric = p.brightness != 0.0 || p.contrast != 1.0;
  for (std::size_t r = 0; r < cfg.crop_height; ++r) {
    for (std::size_t c = 0; c < cfg.crop_width; ++c) {
      const std::size_t sr = p.crop_row + r, sc = p.crop_col + c;
      for (std::size_t ch = 0; ch < f.channels; ++ch) {
        float v;
        if (p.rotation_deg == 0.0) {
          v = f.at(sr, sc, ch);
        } else {
          const double dy = static_cast<double>(sr) - cy, dx = static_cast<double>(sc) - cx;
          v = detail::sample_clamped(f, cy + ct * dy - st * dx, cx + st * dy + ct * dx, ch);
        }
        if (photometric) {
          v = static_cast<float>(
              std::clamp((v - 0.5) * p.contrast + 0.5 + p.brightness, 0.0, 1.0));
        }
        out.at(r, c, ch) = v;
      }
    }
  }
  return out;
}

inline SampledWindow apply_augment(const SampledWindow& w, const AugmentConfig& cfg,
                                   const AugmentParams& p) {
  SampledWindow out;
  out.indices = w.indices;
  out.start = w.start;
  out.tracklet_id = w.tracklet_id;
  out.frames.reserve(w.frames.size());
  for (const auto& f : w.frames) out.frames.push_back(apply_augment(f, cfg, p));
  return out;
}

inline SampledWindow augment_window(const SampledWindow& w, const AugmentConfig& cfg, Rng& rng) {
  if (w.frames.empty()) throw std::invalid_argument("augment_window: empty window");
  return apply_augment(w, cfg, draw_augment_params(cfg, w.frames.front(), rng));
}

/// Deterministic evaluation-time view: centred crop, no jitter.
inline SampledWindow center_crop(const SampledWindow& w, const AugmentConfig& cfg) {
  if (w.frames.empty()) throw std::invalid_argument("center_crop: empty window");
  const auto none = AugmentConfig::none(cfg.crop_height, cfg.crop_width);
  const Frame& f = w.frames.front();
  detail::check_crop(none, f);
  AugmentParams p;
  p.crop_row = (f.height - cfg.crop_height) / 2;
  p.crop_col = (f.width - cfg.crop_width) / 2;
  return apply_augment(w, none, p);
}

}  // namespace jerseyid::weak
