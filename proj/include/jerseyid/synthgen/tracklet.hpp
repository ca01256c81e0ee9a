#pragma once

// Synthetic player tracklets: a jersey-coloured frame with the number drawn
// in a 2x-scaled bitmap font. Visible frames carry a legible number; the
// others show it occluded, faded below legibility, or not at all.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "jerseyid/common.hpp"
#include "jerseyid/synthgen/font.hpp"
#include "jerseyid/synthgen/types.hpp"

namespace jerseyid::synth {

enum class GlyphState { visible, occluded, faded, absent };

/// Per-tracklet look, held constant across its frames.
struct Appearance {
  double background = 0.2;
  double contrast = 0.5;
  int polarity = 1;  // +1: number brighter than the jersey
  bool striped = false;
  std::size_t stripe_row = 0;
  int base_dr = 0;  // number placement offset from the frame centre
  int base_dc = 0;

  double glyph_level() const { return background + polarity * contrast; }
};

struct RenderedFrame {
  Frame frame;
  std::vector<bool> glyph_mask;  // pixels covered by the drawn number (H x W)
  GlyphState state = GlyphState::absent;
};

inline Appearance draw_appearance(const SynthConfig& cfg, Rng& rng) {
  Appearance a;
  a.polarity = uniform01(rng) < 0.5 ? 1 : -1;
  a.background = a.polarity > 0 ? uniform(rng, 0.05, 0.3) : uniform(rng, 0.7, 0.95);
  a.contrast = uniform(rng, cfg.min_contrast, cfg.max_contrast);
  a.striped = uniform01(rng) < 0.5;
  a.stripe_row = uniform_index(rng, cfg.frame_height);
  const int j = static_cast<int>(cfg.position_jitter);
  a.base_dr = static_cast<int>(uniform_index(rng, 2 * j + 1)) - j;
  a.base_dc = static_cast<int>(uniform_index(rng, 2 * j + 1)) - j;
  return a;
}

namespace detail {

inline constexpr int kScale = 2;
inline constexpr int kDigitGap = 2;

inline std::vector<int> digits_of(int jersey) {
  if (jersey < 10) return {jersey};
  return {jersey / 10, jersey % 10};
}

/// Whether the upright (scaled) number covers local coordinate (y, x) with
/// the origin at the number's top-left corner.
inline bool number_pixel(const std::vector<int>& digits, int y, int x) {
  const int dw = static_cast<int>(kGlyphWidth) * kScale;
  const int dh = static_cast<int>(kGlyphHeight) * kScale;
  if (y < 0 || y >= dh || x < 0) return false;
  for (std::size_t d = 0; d < digits.size(); ++d) {
    const int x0 = static_cast<int>(d) * (dw + kDigitGap);
    if (x >= x0 && x < x0 + dw) {
      return glyph_pixel(digits[d], static_cast<std::size_t>(y / kScale),
                         static_cast<std::size_t>((x - x0) / kScale));
    }
  }
  return false;
}

inline void clip_unit(Frame& f) {
  for (auto& v : f.pixels) v = std::clamp(v, 0.0f, 1.0f);
}

}  // namespace detail

/// Renders one grayscale frame. `jersey` may be null only with
/// GlyphState::absent.
inline RenderedFrame render_frame(const SynthConfig& cfg, const Jersey& jersey, GlyphState state,
                                  const Appearance& look, Rng& rng) {
  const std::size_t h = cfg.frame_height, w = cfg.frame_width;
  RenderedFrame out;
  out.state = state;
  out.frame = Frame(h, w, 1, static_cast<float>(look.background));
  out.glyph_mask.assign(h * w, false);
  Frame& f = out.frame;

  if (look.striped) {
    const double level = look.background - look.polarity * 0.12;
    for (std::size_t r = look.stripe_row; r < std::min(h, look.stripe_row + 3); ++r)
      for (std::size_t c = 0; c < w; ++c) f.at(r, c) = static_cast<float>(level);
  }

  // Small per-frame wobble around the tracklet's placement.
  const int dr = look.base_dr + static_cast<int>(uniform_index(rng, 3)) - 1;
  const int dc = look.base_dc + static_cast<int>(uniform_index(rng, 3)) - 1;

  if (state != GlyphState::absent) {
    if (!jersey) throw std::invalid_argument("render_frame: null jersey with a drawn number");
    const auto digits = detail::digits_of(*jersey);
    const int dw = static_cast<int>(kGlyphWidth) * detail::kScale;
    const int num_w = static_cast<int>(digits.size()) * dw +
                      (static_cast<int>(digits.size()) - 1) * detail::kDigitGap;
    const int num_h = static_cast<int>(kGlyphHeight) * detail::kScale;
    const double cy = static_cast<double>(h) / 2.0 + dr;
    const double cx = static_cast<double>(w) / 2.0 + dc;
    const double theta =
        uniform(rng, -cfg.rotation_jitter_deg, cfg.rotation_jitter_deg) * std::numbers::pi / 180.0;
    const double ct = std::cos(theta), st = std::sin(theta);

    double level = look.glyph_level();
    if (state == GlyphState::faded) {
      level = look.background + look.polarity * look.contrast * uniform(rng, 0.1, 0.3);
    }
    int min_c = static_cast<int>(w), max_c = -1, min_r = static_cast<int>(h), max_r = -1;
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t c = 0; c < w; ++c) {
        // Inverse-rotate the pixel centre into the upright number's frame.
        const double py = static_cast<double>(r) + 0.5 - cy;
        const double px = static_cast<double>(c) + 0.5 - cx;
        const double uy = ct * py + st * px + num_h / 2.0;
        const double ux = -st * py + ct * px + num_w / 2.0;
        if (detail::number_pixel(digits, static_cast<int>(std::floor(uy)),
                                 static_cast<int>(std::floor(ux)))) {
          out.glyph_mask[r * w + c] = true;
          f.at(r, c) = static_cast<float>(level);
          min_c = std::min(min_c, static_cast<int>(c));
          max_c = std::max(max_c, static_cast<int>(c));
          min_r = std::min(min_r, static_cast<int>(r));
          max_r = std::max(max_r, static_cast<int>(r));
        }
      }
    }
    if (state == GlyphState::occluded && max_c >= 0) {
      // Opposing player or stick covering most of the number from one side.
      const int box_w = max_c - min_c + 1;
      const int cover = static_cast<int>(std::ceil(box_w * uniform(rng, 0.75, 1.0)));
      const bool from_left = uniform01(rng) < 0.5;
      const int c0 = from_left ? min_c - 1 : max_c + 1 - cover;
      const int c1 = from_left ? min_c + cover : max_c + 2;
      const double occ = std::clamp(
          look.background - look.polarity * uniform(rng, 0.05, 0.2), 0.0, 1.0);
      for (int r = std::max(0, min_r - 1); r <= std::min(static_cast<int>(h) - 1, max_r + 1); ++r)
        for (int c = std::max(0, c0); c < std::min(static_cast<int>(w), c1); ++c)
          f.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = static_cast<float>(occ);
    }
  } else if (uniform01(rng) < cfg.occlusion_probability) {
    // Occluder with nothing behind it, so occluders alone carry no label.
    const std::size_t rh = 8 + uniform_index(rng, 8), rw = 10 + uniform_index(rng, 12);
    const std::size_t r0 = uniform_index(rng, h - std::min(h, rh) + 1);
    const std::size_t c0 = uniform_index(rng, w - std::min(w, rw) + 1);
    const double occ =
        std::clamp(look.background - look.polarity * uniform(rng, 0.05, 0.2), 0.0, 1.0);
    for (std::size_t r = r0; r < std::min(h, r0 + rh); ++r)
      for (std::size_t c = c0; c < std::min(w, c0 + rw); ++c) f.at(r, c) = static_cast<float>(occ);
  }

  std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
  for (auto& v : f.pixels) v = static_cast<float>(v + noise(rng));
  detail::clip_unit(f);
  return out;
}

/// Fraction of the number's pixels that still sit near the legible glyph
/// level; ~1 on visible frames, well below 1/2 otherwise.
inline double legible_fraction(const RenderedFrame& rf, const Appearance& look) {
  std::size_t on = 0, legible = 0;
  const double target = look.glyph_level();
  for (std::size_t i = 0; i < rf.glyph_mask.size(); ++i) {
    if (!rf.glyph_mask[i]) continue;
    ++on;
    if (std::abs(rf.frame.pixels[i] - target) < look.contrast / 2.0) ++legible;
  }
  return on == 0 ? 0.0 : static_cast<double>(legible) / static_cast<double>(on);
}

/// Visibility bits with `count` set bits grouped into at most `runs`
/// separated contiguous runs.
inline std::vector<bool> draw_visibility(std::size_t n, std::size_t count, std::size_t runs,
                                         Rng& rng) {
  std::vector<bool> bits(n, false);
  if (count == 0) return bits;
  count = std::min(count, n);
  const std::size_t free = n - count;
  std::size_t r = std::min({runs, count, free + 1});
  r = std::max<std::size_t>(r, 1);

  // Run lengths: r positive parts of `count`.
  std::vector<std::size_t> cuts;
  {
    std::vector<std::size_t> pool(count - 1);
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i + 1;
    std::shuffle(pool.begin(), pool.end(), rng);
    cuts.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(r - 1));
    std::sort(cuts.begin(), cuts.end());
  }
  std::vector<std::size_t> lengths;
  std::size_t prev = 0;
  for (std::size_t c : cuts) {
    lengths.push_back(c - prev);
    prev = c;
  }
  lengths.push_back(count - prev);

  // Gaps: r + 1 bins, interior ones at least one frame wide.
  std::vector<std::size_t> gaps(r + 1, 0);
  for (std::size_t i = 1; i < r; ++i) gaps[i] = 1;
  for (std::size_t i = 0; i < free - (r - 1); ++i) ++gaps[uniform_index(rng, r + 1)];

  std::size_t pos = 0;
  for (std::size_t i = 0; i < r; ++i) {
    pos += gaps[i];
    for (std::size_t k = 0; k < lengths[i]; ++k) bits[pos++] = true;
  }
  return bits;
}

struct TrackletSpec {
  std::string id;
  TeamSide side = TeamSide::home;
  Jersey jersey;
  double clip_start_s = 0.0;
};

/// Deterministic in (cfg, classes, spec, seed).
inline Tracklet gen_tracklet(const SynthConfig& cfg, const ClassSpace& classes,
                             const TrackletSpec& spec, std::uint64_t seed) {
  if (spec.jersey && !classes.contains(*spec.jersey)) {
    throw std::invalid_argument("gen_tracklet: jersey " + std::to_string(*spec.jersey) +
                                " is not in the roster");
  }
  Rng rng(seed);
  const std::size_t n = cfg.min_length + uniform_index(rng, cfg.max_length - cfg.min_length + 1);
  Tracklet t;
  t.id = spec.id;
  t.team_side = spec.side;
  t.label = spec.jersey;
  t.clip_start_s = spec.clip_start_s;
  t.clip_end_s = spec.clip_start_s + static_cast<double>(n - 1) / cfg.frames_per_second;

  if (spec.jersey) {
    const double frac = uniform(rng, cfg.min_visibility, cfg.max_visibility);
    const auto count = static_cast<std::size_t>(
        std::clamp<long>(std::lround(frac * static_cast<double>(n)), 1L, static_cast<long>(n)));
    t.visibility = draw_visibility(n, count, cfg.visibility_runs, rng);
  } else {
    t.visibility.assign(n, false);
  }

  const Appearance look = draw_appearance(cfg, rng);
  t.frames.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    GlyphState state = GlyphState::absent;
    if (spec.jersey) {
      if (t.visibility[k]) {
        state = GlyphState::visible;
      } else {
        const double u = uniform01(rng);
        if (u < cfg.occlusion_probability) state = GlyphState::occluded;
        else if (u < cfg.occlusion_probability + cfg.fade_probability) state = GlyphState::faded;
      }
    }
    t.frames.push_back(render_frame(cfg, spec.jersey, state, look, rng).frame);
  }
  return t;
}

}  // namespace jerseyid::synth
