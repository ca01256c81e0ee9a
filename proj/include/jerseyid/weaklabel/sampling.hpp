#pragma once

#include <algorithm>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "jerseyid/common.hpp"
#include "jerseyid/synthgen/types.hpp"
#include "jerseyid/weaklabel/labels.hpp"

namespace jerseyid::weak {

/// m contiguous frames cut from a tracklet. Indices past the tracklet end
/// repeat the last frame.
struct SampledWindow {
  std::vector<Frame> frames;
  std::vector<std::size_t> indices;  // source frame index of each entry
  std::size_t start = 0;
  std::string tracklet_id;

  std::size_t size() const { return frames.size(); }
};

/// Frames [start, start + m) of `t`, padded by repeating the final frame.
inline SampledWindow cut_window(const Tracklet& t, std::size_t start, std::size_t m) {
  if (m == 0) throw std::invalid_argument("window length m must be >= 1");
  if (t.size() == 0) throw std::invalid_argument("cannot cut a window from an empty tracklet");
  SampledWindow w;
  w.start = std::min(start, t.size() - 1);
  w.tracklet_id = t.id;
  w.frames.reserve(m);
  w.indices.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t k = std::min(w.start + i, t.size() - 1);
    w.indices.push_back(k);
    w.frames.push_back(t.frames[k]);
  }
  return w;
}

/// Window start for a visible anchor `start_idx` pulled back by `offset`.
inline std::size_t window_start(std::size_t start_idx, std::size_t offset) {
  return start_idx >= offset ? start_idx - offset : 0;
}

/// Uniform start in [0, n - m] (0 when the tracklet is shorter than m).
inline SampledWindow sample_uniform_window(const Tracklet& t, std::size_t m, Rng& rng) {
  if (m == 0) throw std::invalid_argument("window length m must be >= 1");
  const std::size_t span = t.size() > m ? t.size() - m + 1 : 1;
  return cut_window(t, uniform_index(rng, span), m);
}

/// Draws an anchor uniformly from the frames labelled visible and an offset
/// o uniformly from [0, m), then starts the window at max(0, anchor - o).
/// Tracklets with no visible frame fall back to a uniform start.
inline SampledWindow sample_window(const Tracklet& t, const FrameLabels& labels, std::size_t m,
                                   Rng& rng) {
  if (m == 0) throw std::invalid_argument("window length m must be >= 1");
  if (labels.size() != t.size()) {
    throw std::invalid_argument("sample_window: " + std::to_string(labels.size()) +
                                " labels for " + std::to_string(t.size()) + " frames");
  }
  std::vector<std::size_t> visible;
  for (std::size_t k = 0; k < labels.size(); ++k)
    if (labels.bits[k]) visible.push_back(k);
  if (visible.empty()) return sample_uniform_window(t, m, rng);
  const std::size_t anchor = visible[uniform_index(rng, visible.size())];
  const std::size_t offset = uniform_index(rng, m);
  return cut_window(t, window_start(anchor, offset), m);
}

/// Draws null-class tracklets with probability p_s and the others
/// otherwise, uniformly within each stratum.
class TrackletSampler {
 public:
  TrackletSampler(std::span<const Tracklet> tracklets, double p_s)
      : tracklets_(tracklets), p_s_(p_s) {
    if (!(p_s >= 0.0 && p_s <= 1.0)) throw std::invalid_argument("p_s must lie in [0, 1]");
    for (std::size_t i = 0; i < tracklets.size(); ++i)
      (tracklets[i].is_null() ? null_ : labelled_).push_back(i);
    if (p_s > 0.0 && null_.empty()) {
      throw std::invalid_argument("tracklet sampler: null stratum is empty");
    }
    if (p_s < 1.0 && labelled_.empty()) {
      throw std::invalid_argument("tracklet sampler: non-null stratum is empty");
    }
  }

  std::size_t draw_index(Rng& rng) const {
    const bool pick_null = uniform01(rng) < p_s_;
    const auto& stratum = pick_null ? null_ : labelled_;
    return stratum[uniform_index(rng, stratum.size())];
  }

  const Tracklet& draw(Rng& rng) const { return tracklets_[draw_index(rng)]; }

  double p_s() const { return p_s_; }

 private:
  std::span<const Tracklet> tracklets_;
  double p_s_;
  std::vector<std::size_t> null_;
  std::vector<std::size_t> labelled_;
};

inline const Tracklet& draw_training_tracklet(std::span<const Tracklet> dataset, double p_s,
                                              Rng& rng) {
  return TrackletSampler(dataset, p_s).draw(rng);
}

}  // namespace jerseyid::weak
