#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "jerseyid/common.hpp"
#include "jerseyid/synthgen/shiftdb.hpp"
#include "jerseyid/synthgen/tracklet.hpp"
#include "jerseyid/synthgen/types.hpp"

namespace jerseyid::synth {

inline std::vector<int> draw_roster(const ClassSpace& classes, std::size_t size, Rng& rng) {
  std::vector<int> pool = classes.jerseys();
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(std::min(size, pool.size()));
  std::sort(pool.begin(), pool.end());
  return pool;
}

/// One synthetic game with its shift database and train/test tracklets.
/// Every non-null player tracklet shows a jersey that is on the ice at the
/// clip's start time. Pure function of `cfg` (including its seed).
inline Dataset gen_dataset(const SynthConfig& cfg, const ShiftTiming& timing = {}) {
  cfg.validate();
  Dataset ds;
  ds.classes = ClassSpace::sequential(cfg.classes);
  ds.game_length_s = cfg.game_length_s;

  Rng roster_rng(derive_seed(cfg.seed, seed_stream::data, 0));
  ds.rosters.home = draw_roster(ds.classes, cfg.roster_size, roster_rng);
  ds.rosters.away = draw_roster(ds.classes, cfg.roster_size, roster_rng);
  ds.shifts = gen_shift_db(ds.rosters, cfg.game_length_s,
                           derive_seed(cfg.seed, seed_stream::shifts), timing);

  const double clip_span = static_cast<double>(cfg.max_length) / cfg.frames_per_second;
  const double latest_start = std::max(0.0, cfg.game_length_s - clip_span - 1.0);
  const std::size_t total = cfg.train_tracklets + cfg.test_tracklets;
  for (std::size_t i = 0; i < total; ++i) {
    Rng rng(derive_seed(cfg.seed, seed_stream::data, 1 + i));
    TrackletSpec spec;
    spec.id = "trk" + std::string(5 - std::min<std::size_t>(5, std::to_string(i).size()), '0') +
              std::to_string(i);
    const double u = uniform01(rng);
    spec.side = u < cfg.referee_fraction                              ? TeamSide::referee
                : uniform01(rng) < 0.5                                ? TeamSide::home
                                                                      : TeamSide::away;
    spec.clip_start_s = std::floor(uniform(rng, 0.0, latest_start) * 100.0) / 100.0;
    const bool null_label = spec.side == TeamSide::referee || uniform01(rng) < cfg.null_fraction;
    if (!null_label) {
      const auto on_ice = ds.shifts.active_at(spec.side, spec.clip_start_s);
      spec.jersey = on_ice[uniform_index(rng, on_ice.size())];
    }
    Tracklet t = gen_tracklet(cfg, ds.classes, spec,
                              derive_seed(cfg.seed, seed_stream::data, 1'000'000 + i));
    (i < cfg.train_tracklets ? ds.train : ds.test).push_back(std::move(t));
  }
  return ds;
}

}  // namespace jerseyid::synth
