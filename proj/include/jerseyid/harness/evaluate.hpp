#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "jerseyid/harness/config.hpp"
#include "jerseyid/harness/metrics.hpp"
#include "jerseyid/model/params.hpp"
#include "jerseyid/shiftsync/inference.hpp"
#include "jerseyid/synthgen/types.hpp"

namespace jerseyid::harness {

using synth::Tracklet;

struct ModeScores {
  double accuracy = 0.0;
  double weighted_f1 = 0.0;
};

struct EvalResult {
  MaskMode mode = MaskMode::shifts;
  ModeScores shifts, roster, none;
  std::vector<shiftsync::TrackletPrediction> predictions;
  std::vector<std::size_t> truth;  // class index per tracklet
  std::size_t unreadable_clocks = 0;

  const ModeScores& selected() const {
    return mode == MaskMode::shifts ? shifts : mode == MaskMode::roster ? roster : none;
  }
  double accuracy() const { return selected().accuracy; }
  double weighted_f1() const { return selected().weighted_f1; }
};

struct EvalContext {
  const ClassSpace* classes = nullptr;
  const synth::Rosters* rosters = nullptr;
  const synth::ShiftDb* shifts = nullptr;  // required for MaskMode::shifts
};

inline EvalResult evaluate(const model::ModelParams& params, const model::ModelConfig& cfg,
                           std::span<const Tracklet> tracklets, const EvalContext& ctx,
                           MaskMode mode) {
  if (!ctx.classes || !ctx.rosters) throw std::invalid_argument("evaluate: missing class space or rosters");
  if (mode == MaskMode::shifts && !ctx.shifts)
    throw std::invalid_argument("evaluate: mask mode 'shifts' needs a shift database");
  if (ctx.classes->size() != cfg.classes) {
    throw std::invalid_argument("evaluate: model has " + std::to_string(cfg.classes) +
                                " classes, dataset has " + std::to_string(ctx.classes->size()));
  }
  if (tracklets.empty()) throw std::invalid_argument("evaluate: no tracklets");

  EvalResult r;
  r.mode = mode;
  const shiftsync::MaskContext mask{ctx.classes, ctx.shifts, ctx.rosters};
  std::vector<std::size_t> unmasked, masked, roster;
  for (const auto& t : tracklets) {
    auto pred = shiftsync::predict_tracklet(t, params, cfg, mask);
    if (ctx.shifts && t.team_side != TeamSide::referee && !pred.clock_read) ++r.unreadable_clocks;
    r.truth.push_back(ctx.classes->index_of(t.label));
    unmasked.push_back(pred.unmasked);
    masked.push_back(pred.masked);
    roster.push_back(pred.roster);
    r.predictions.push_back(std::move(pred));
  }
  r.none = {harness::accuracy(r.truth, unmasked), weighted_f1(r.truth, unmasked)};
  r.roster = {harness::accuracy(r.truth, roster), weighted_f1(r.truth, roster)};
  r.shifts = ctx.shifts ? ModeScores{harness::accuracy(r.truth, masked), weighted_f1(r.truth, masked)}
                        : r.none;
  return r;
}

inline void write_report_csv(const std::filesystem::path& path, const EvalResult& r,
                             std::span<const Tracklet> tracklets, const ClassSpace& classes) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write report " + path.string());
  out << shiftsync::report_header() << '\n';
  for (std::size_t i = 0; i < r.predictions.size(); ++i)
    out << shiftsync::report_row(r.predictions[i], tracklets[i].label, classes) << '\n';
}

}  // namespace jerseyid::harness
