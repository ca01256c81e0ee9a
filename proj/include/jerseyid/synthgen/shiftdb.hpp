#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <vector>

#include "jerseyid/common.hpp"
#include "jerseyid/synthgen/types.hpp"

namespace jerseyid::synth {

inline constexpr std::size_t kPlayersOnIce = 6;

struct ShiftTiming {
  double min_shift_s = 30.0;
  double max_shift_s = 90.0;
};

namespace detail {

inline void gen_team_shifts(TeamSide team, const std::vector<int>& roster, double game_length_s,
                            const ShiftTiming& timing, Rng& rng, std::vector<ShiftRecord>& out) {
  std::vector<int> bench = roster;
  std::shuffle(bench.begin(), bench.end(), rng);
  std::map<int, double> on_ice;  // jersey -> shift start
  for (std::size_t i = 0; i < kPlayersOnIce; ++i) {
    on_ice.emplace(bench.back(), 0.0);
    bench.pop_back();
  }

  double t = uniform(rng, timing.min_shift_s, timing.max_shift_s);
  while (t < game_length_s) {
    if (!bench.empty()) {
      const std::size_t swaps = 1 + uniform_index(rng, std::min(kPlayersOnIce, bench.size()));
      std::vector<int> current;
      for (const auto& [j, start] : on_ice) current.push_back(j);
      std::shuffle(current.begin(), current.end(), rng);
      std::shuffle(bench.begin(), bench.end(), rng);
      std::vector<int> leaving(current.begin(), current.begin() + static_cast<long>(swaps));
      std::vector<int> entering(bench.end() - static_cast<long>(swaps), bench.end());
      bench.resize(bench.size() - swaps);
      for (int j : leaving) {
        out.push_back({team, j, on_ice.at(j), t});
        on_ice.erase(j);
      }
      for (int j : entering) on_ice.emplace(j, t);
      bench.insert(bench.end(), leaving.begin(), leaving.end());
    }
    t += uniform(rng, timing.min_shift_s, timing.max_shift_s);
  }
  for (const auto& [j, start] : on_ice) out.push_back({team, j, start, game_length_s});
}

}  // namespace detail

/// Shift database in which exactly six players per team are on the ice at
/// every instant of [0, game_length_s) (presence is half-open per record).
inline ShiftDb gen_shift_db(const Rosters& rosters, double game_length_s, std::uint64_t seed,
                            const ShiftTiming& timing = {}) {
  for (TeamSide side : {TeamSide::home, TeamSide::away}) {
    const auto& roster = rosters.of(side);
    if (roster.size() < kPlayersOnIce) {
      throw std::invalid_argument(std::string("gen_shift_db: ") + std::string(to_string(side)) +
                                  " roster has " + std::to_string(roster.size()) +
                                  " players, need at least 6");
    }
    auto sorted = roster;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw std::invalid_argument("gen_shift_db: duplicate jersey in roster");
    }
  }
  if (!(game_length_s > 0.0)) throw std::invalid_argument("gen_shift_db: empty game");
  if (!(timing.min_shift_s > 0.0) || timing.max_shift_s < timing.min_shift_s) {
    throw std::invalid_argument("gen_shift_db: invalid shift length range");
  }
  Rng rng(seed);
  std::vector<ShiftRecord> records;
  detail::gen_team_shifts(TeamSide::home, rosters.home, game_length_s, timing, rng, records);
  detail::gen_team_shifts(TeamSide::away, rosters.away, game_length_s, timing, rng, records);
  std::stable_sort(records.begin(), records.end(), [](const ShiftRecord& a, const ShiftRecord& b) {
    return a.start_s < b.start_s;
  });
  return ShiftDb(std::move(records));
}

}  // namespace jerseyid::synth
