#pragma once

// Scoreboard clock strips: "MM:SS" drawn with the fixed 5x7 template font,
// white on black, no anti-aliasing.

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "jerseyid/synthgen/font.hpp"
#include "jerseyid/synthgen/types.hpp"

namespace jerseyid::synth {

inline constexpr std::size_t kClockHeight = kGlyphHeight + 2;
inline constexpr std::size_t kClockWidth = 27;
/// Left column of each digit slot (M, M, S, S); the colon sits at column 13.
inline constexpr std::array<std::size_t, 4> kClockSlots = {1, 7, 15, 21};
inline constexpr std::size_t kClockColon = 13;

inline std::string format_clock(int t) {
  if (t < 0 || t >= 3600) throw std::out_of_range("game time " + std::to_string(t) + " s");
  const int mm = t / 60, ss = t % 60;
  std::string s = "00:00";
  s[0] = static_cast<char>('0' + mm / 10);
  s[1] = static_cast<char>('0' + mm % 10);
  s[3] = static_cast<char>('0' + ss / 10);
  s[4] = static_cast<char>('0' + ss % 10);
  return s;
}

/// `t` is truncated to whole seconds.
inline Frame render_clock_strip(double t) {
  if (!(t >= 0.0) || t >= 3600.0) {
    throw std::out_of_range("render_clock_strip: game time " + std::to_string(t) +
                            " outside [0, 3600)");
  }
  const int secs = static_cast<int>(std::floor(t));
  const std::string text = format_clock(secs);
  const std::array<int, 4> digits = {text[0] - '0', text[1] - '0', text[3] - '0', text[4] - '0'};
  Frame strip(kClockHeight, kClockWidth, 1, 0.0f);
  for (std::size_t d = 0; d < 4; ++d)
    for (std::size_t r = 0; r < kGlyphHeight; ++r)
      for (std::size_t c = 0; c < kGlyphWidth; ++c)
        if (glyph_pixel(digits[d], r, c)) strip.at(r + 1, kClockSlots[d] + c) = 1.0f;
  strip.at(1 + 2, kClockColon) = 1.0f;
  strip.at(1 + 4, kClockColon) = 1.0f;
  return strip;
}

}  // namespace jerseyid::synth
