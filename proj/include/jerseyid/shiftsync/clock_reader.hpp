#pragma once

// Reads "MM:SS" scoreboard strips by normalized cross-correlation of each
// digit slot against the ten font templates.

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "jerseyid/synthgen/clock.hpp"
#include "jerseyid/synthgen/font.hpp"

namespace jerseyid::shiftsync {

using synth::Frame;

inline constexpr double kClockConfidenceThreshold = 0.8;

struct GameClockReading {
  int t = 0;                // game seconds
  double confidence = 0.0;  // min over digit slots of the best template correlation
};

class UnreadableClock : public std::runtime_error {
 public:
  UnreadableClock(const std::string& why, double confidence)
      : std::runtime_error("unreadable clock: " + why), confidence_(confidence) {}
  double confidence() const { return confidence_; }

 private:
  double confidence_;
};

namespace detail {

inline constexpr std::size_t kPatch = synth::kGlyphWidth * synth::kGlyphHeight;

/// Zero-mean, unit-norm copy of a patch; false if the patch is flat.
inline bool normalize(std::array<double, kPatch>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(kPatch);
  double norm = 0.0;
  for (double& x : v) {
    x -= mean;
    norm += x * x;
  }
  if (norm < 1e-12) return false;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return true;
}

inline const std::array<std::array<double, kPatch>, 10>& digit_templates() {
  static const auto templates = [] {
    std::array<std::array<double, kPatch>, 10> t{};
    for (int d = 0; d < 10; ++d) {
      for (std::size_t r = 0; r < synth::kGlyphHeight; ++r)
        for (std::size_t c = 0; c < synth::kGlyphWidth; ++c)
          t[d][r * synth::kGlyphWidth + c] = synth::glyph_pixel(d, r, c) ? 1.0 : 0.0;
      normalize(t[d]);
    }
    return t;
  }();
  return templates;
}

struct SlotMatch {
  int digit = 0;
  double score = 0.0;
};

inline SlotMatch match_slot(const Frame& strip, std::size_t col0) {
  std::array<double, kPatch> patch{};
  for (std::size_t r = 0; r < synth::kGlyphHeight; ++r)
    for (std::size_t c = 0; c < synth::kGlyphWidth; ++c)
      patch[r * synth::kGlyphWidth + c] = strip.at(r + 1, col0 + c);
  if (!normalize(patch)) return {0, 0.0};
  SlotMatch best{0, -2.0};
  const auto& templates = digit_templates();
  for (int d = 0; d < 10; ++d) {
    double s = 0.0;
    for (std::size_t i = 0; i < kPatch; ++i) s += patch[i] * templates[d][i];
    if (s > best.score) best = {d, s};
  }
  return best;
}

}  // namespace detail

/// Throws UnreadableClock when any slot correlates below `threshold` or the
/// digits do not form a valid MM:SS time.
inline GameClockReading read_clock(const Frame& strip,
                                   double threshold = kClockConfidenceThreshold) {
  if (strip.height != synth::kClockHeight || strip.width != synth::kClockWidth ||
      strip.channels != 1) {
    throw std::invalid_argument("read_clock: strip is " + std::to_string(strip.height) + "x" +
                                std::to_string(strip.width) + "x" +
                                std::to_string(strip.channels) + ", expected " +
                                std::to_string(synth::kClockHeight) + "x" +
                                std::to_string(synth::kClockWidth) + "x1");
  }
  std::array<int, 4> digits{};
  double confidence = 1.0;
  for (std::size_t s = 0; s < 4; ++s) {
    const auto m = detail::match_slot(strip, synth::kClockSlots[s]);
    digits[s] = m.digit;
    confidence = std::min(confidence, m.score);
  }
  confidence = std::max(confidence, 0.0);
  if (confidence < threshold) {
    throw UnreadableClock("template confidence " + std::to_string(confidence) + " below " +
                              std::to_string(threshold),
                          confidence);
  }
  if (digits[0] > 5 || digits[2] > 5) {
    throw UnreadableClock("digits do not form a valid MM:SS time", confidence);
  }
  return {(digits[0] * 10 + digits[1]) * 60 + digits[2] * 10 + digits[3], confidence};
}

}  // namespace jerseyid::shiftsync
