#pragma once

// Tracklet-level identification: windowed forward passes, aggregation, and
// the three masking variants (shift data, roster data, none).

#include <optional>
#include <string>
#include <vector>

#include "jerseyid/model/network.hpp"
#include "jerseyid/shiftsync/clock_reader.hpp"
#include "jerseyid/shiftsync/masking.hpp"
#include "jerseyid/synthgen/clock.hpp"
#include "jerseyid/weaklabel/augment.hpp"

namespace jerseyid::shiftsync {

using synth::Tracklet;

struct ClipWindow {
  double t_s = 0.0;
  double t_e = 0.0;
};

/// Game-time window of a clip from its first and last scoreboard strips.
/// The clock shows whole seconds, so a reading t stands for [t, t + 1) and
/// the end of the window is widened by one second. nullopt when either strip
/// is unreadable.
inline std::optional<ClipWindow> read_clip_window(const Frame& first_strip,
                                                  const Frame& last_strip) {
  try {
    const auto a = read_clock(first_strip);
    const auto b = read_clock(last_strip);
    if (b.t < a.t) return std::nullopt;
    return ClipWindow{static_cast<double>(a.t), static_cast<double>(b.t) + 1.0};
  } catch (const UnreadableClock&) {
    return std::nullopt;
  }
}

inline std::optional<ClipWindow> read_clip_window(const Tracklet& t) {
  return read_clip_window(synth::render_clock_strip(t.clip_start_s),
                          synth::render_clock_strip(t.clip_end_s));
}

struct TrackletPrediction {
  std::string tracklet_id;
  TeamSide team_side = TeamSide::home;
  std::vector<double> p_jn;
  std::size_t unmasked = 0;  // class indices
  std::size_t masked = 0;
  std::size_t roster = 0;
  bool clock_read = false;
};

/// Non-overlapping windows of length m covering the tracklet (the last one
/// padded), centre-cropped to the model input size.
inline std::vector<weak::SampledWindow> inference_windows(const Tracklet& t,
                                                          const model::ModelConfig& cfg) {
  const auto crop = weak::AugmentConfig::none(cfg.frame_height, cfg.frame_width);
  std::vector<weak::SampledWindow> out;
  for (std::size_t start = 0; start < t.size(); start += cfg.window)
    out.push_back(weak::center_crop(weak::cut_window(t, start, cfg.window), crop));
  return out;
}

inline std::vector<double> tracklet_probabilities(const Tracklet& t, const model::ModelParams& p,
                                                  const model::ModelConfig& cfg) {
  numkit::NoGradGuard guard;
  const auto windows = inference_windows(t, cfg);
  const auto outs = model::forward_batch(windows, p, cfg);
  std::vector<std::vector<double>> p0;
  p0.reserve(outs.size());
  for (const auto& o : outs) p0.emplace_back(o.p0.data().begin(), o.p0.data().end());
  return aggregate_tracklet(p0);
}

struct MaskContext {
  const ClassSpace* classes = nullptr;
  const ShiftDb* shifts = nullptr;  // may be null: shift masking then falls back to unmasked
  const Rosters* rosters = nullptr;
};

/// Applies all three masking variants to an aggregated probability vector.
/// Referee tracklets are never masked.
inline TrackletPrediction identify(const Tracklet& t, std::vector<double> p_jn,
                                   const MaskContext& ctx) {
  TrackletPrediction pred;
  pred.tracklet_id = t.id;
  pred.team_side = t.team_side;
  pred.unmasked = argmax_lowest(p_jn);
  pred.masked = pred.roster = pred.unmasked;
  if (t.team_side != TeamSide::referee) {
    if (ctx.shifts) {
      if (const auto w = read_clip_window(t)) {
        pred.clock_read = true;
        const auto sets = shifts_in_window(*ctx.shifts, w->t_s, w->t_e);
        pred.masked =
            masked_identity(p_jn, build_shift_vector(sets.of(t.team_side), t.team_side, *ctx.classes));
      }
    }
    if (ctx.rosters)
      pred.roster = masked_identity(p_jn, roster_vector(*ctx.rosters, t.team_side, *ctx.classes));
  }
  pred.p_jn = std::move(p_jn);
  return pred;
}

inline TrackletPrediction predict_tracklet(const Tracklet& t, const model::ModelParams& p,
                                           const model::ModelConfig& cfg, const MaskContext& ctx) {
  return identify(t, tracklet_probabilities(t, p, cfg), ctx);
}

// ---------------------------------------------------------------------------
// Report CSV: tracklet_id,team_side,unmasked_id,masked_id,roster_id,true_id

inline std::string report_header() {
  return "tracklet_id,team_side,unmasked_id,masked_id,roster_id,true_id";
}

inline std::string report_row(const TrackletPrediction& pred, const Jersey& truth,
                              const ClassSpace& classes) {
  return pred.tracklet_id + "," + std::string(to_string(pred.team_side)) + "," +
         jersey_str(classes.jersey_at(pred.unmasked)) + "," +
         jersey_str(classes.jersey_at(pred.masked)) + "," +
         jersey_str(classes.jersey_at(pred.roster)) + "," + jersey_str(truth);
}

}  // namespace jerseyid::shiftsync
