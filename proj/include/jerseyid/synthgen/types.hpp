#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "jerseyid/common.hpp"

namespace jerseyid::synth {

/// H x W x C image, channel-interleaved, values in [0, 1].
struct Frame {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 1;
  std::vector<float> pixels;

  Frame() = default;
  Frame(std::size_t h, std::size_t w, std::size_t c = 1, float fill = 0.0f)
      : height(h), width(w), channels(c), pixels(h * w * c, fill) {}

  float& at(std::size_t r, std::size_t col, std::size_t ch = 0) {
    return pixels[(r * width + col) * channels + ch];
  }
  float at(std::size_t r, std::size_t col, std::size_t ch = 0) const {
    return pixels[(r * width + col) * channels + ch];
  }
  bool same_geometry(const Frame& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct Tracklet {
  std::string id;
  std::vector<Frame> frames;
  TeamSide team_side = TeamSide::home;
  Jersey label;                  // nullopt: null class
  std::vector<bool> visibility;  // synthetic ground truth, one bit per frame
  double clip_start_s = 0.0;     // game time of the first frame
  double clip_end_s = 0.0;       // game time of the last frame

  std::size_t size() const { return frames.size(); }
  bool is_null() const { return !label.has_value(); }

  friend bool operator==(const Tracklet&, const Tracklet&) = default;
};

struct SynthConfig {
  std::size_t classes = 21;  // K, including null
  std::size_t frame_height = 32;
  std::size_t frame_width = 32;
  std::size_t min_length = 24;
  std::size_t max_length = 64;
  double min_visibility = 0.3;  // fraction of frames with a legible number
  double max_visibility = 0.8;
  std::size_t visibility_runs = 2;      // visible frames come in up to this many runs
  double occlusion_probability = 0.35;  // invisible frame: occluded glyph
  double fade_probability = 0.25;       // invisible frame: glyph below legibility
  double rotation_jitter_deg = 8.0;     // per-frame glyph tilt on visible frames
  double null_fraction = 0.5;
  double referee_fraction = 0.05;
  double min_contrast = 0.4;   // glyph vs. jersey on visible frames
  double max_contrast = 0.65;
  double noise_sigma = 0.04;
  std::size_t position_jitter = 2;
  std::size_t roster_size = 12;  // per team
  double game_length_s = 3600.0;
  double frames_per_second = 30.0;
  std::size_t train_tracklets = 600;
  std::size_t test_tracklets = 100;
  std::uint64_t seed = 7;

  void validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("synth config: " + what); };
    if (classes < 2 || classes > 100) fail("classes must be in [2, 100]");
    if (frame_height < 16 || frame_width < 16) fail("frames must be at least 16x16");
    if (min_length < 1 || max_length < min_length) fail("invalid tracklet length range");
    if (!(min_visibility > 0.0) || max_visibility > 1.0 || max_visibility < min_visibility)
      fail("visibility fraction range must lie in (0, 1]");
    if (visibility_runs < 1) fail("visibility_runs must be >= 1");
    if (occlusion_probability < 0 || fade_probability < 0 ||
        occlusion_probability + fade_probability > 1.0)
      fail("occlusion/fade probabilities must be non-negative and sum to <= 1");
    if (null_fraction < 0 || null_fraction > 1 || referee_fraction < 0 || referee_fraction > 1)
      fail("fractions must lie in [0, 1]");
    if (!(min_contrast > 0.0) || max_contrast < min_contrast || max_contrast > 0.9)
      fail("contrast range must lie in (0, 0.9]");
    if (roster_size < 6) fail("roster_size must be >= 6");
    if (roster_size > classes - 1) fail("roster_size exceeds available jerseys");
    if (!(game_length_s > 0.0) || game_length_s > 3600.0) fail("game length must be in (0, 3600]");
    if (!(frames_per_second > 0.0)) fail("frames_per_second must be positive");
  }
};

struct ShiftRecord {
  TeamSide team = TeamSide::home;  // home or away
  int jersey = 0;
  double start_s = 0.0;
  double end_s = 0.0;

  /// Half-open presence used for instant queries.
  bool active_at(double t) const { return start_s <= t && t < end_s; }
  /// Closed-interval overlap with [t_s, t_e].
  bool overlaps(double t_s, double t_e) const { return start_s <= t_e && t_s <= end_s; }

  friend bool operator==(const ShiftRecord&, const ShiftRecord&) = default;
};

struct Rosters {
  std::vector<int> home;
  std::vector<int> away;

  const std::vector<int>& of(TeamSide side) const {
    if (side == TeamSide::referee) throw std::invalid_argument("referees have no roster");
    return side == TeamSide::home ? home : away;
  }

  friend bool operator==(const Rosters&, const Rosters&) = default;
};

class ShiftDb {
 public:
  ShiftDb() = default;
  explicit ShiftDb(std::vector<ShiftRecord> records) : records_(std::move(records)) {
    for (const auto& r : records_) {
      if (r.team == TeamSide::referee) throw std::invalid_argument("shift record for a referee");
      if (!(r.start_s >= 0.0) || !(r.start_s < r.end_s)) {
        throw std::invalid_argument("shift record for #" + std::to_string(r.jersey) +
                                    " has an empty or negative interval");
      }
    }
  }

  const std::vector<ShiftRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  std::vector<int> active_at(TeamSide team, double t) const {
    std::vector<int> out;
    for (const auto& r : records_)
      if (r.team == team && r.active_at(t)) out.push_back(r.jersey);
    return out;
  }

  friend bool operator==(const ShiftDb&, const ShiftDb&) = default;

 private:
  std::vector<ShiftRecord> records_;
};

/// One synthetic game: the class space, both rosters, the shift database
/// and the train/test tracklets.
struct Dataset {
  ClassSpace classes;
  Rosters rosters;
  double game_length_s = 3600.0;
  ShiftDb shifts;
  std::vector<Tracklet> train;
  std::vector<Tracklet> test;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

}  // namespace jerseyid::synth
