#pragma once

#include <algorithm>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "jerseyid/common.hpp"
#include "jerseyid/synthgen/types.hpp"

namespace jerseyid::shiftsync {

using synth::Rosters;
using synth::ShiftDb;

/// Jerseys of each team whose shift overlaps a game-time window.
struct WindowSets {
  std::set<int> home;
  std::set<int> away;

  const std::set<int>& of(TeamSide side) const {
    if (side == TeamSide::referee) throw std::invalid_argument("referees have no shift set");
    return side == TeamSide::home ? home : away;
  }
};

/// A record is selected iff [start_s, end_s] and [t_s, t_e] intersect.
inline WindowSets shifts_in_window(const ShiftDb& db, double t_s, double t_e) {
  if (t_s > t_e) {
    throw std::invalid_argument("shifts_in_window: t_s " + std::to_string(t_s) + " > t_e " +
                                std::to_string(t_e));
  }
  WindowSets out;
  for (const auto& r : db.records()) {
    if (!r.overlaps(t_s, t_e)) continue;
    (r.team == TeamSide::home ? out.home : out.away).insert(r.jersey);
  }
  return out;
}

/// Binary mask over the holistic classes; the null bit is always set.
struct ShiftVector {
  std::vector<bool> bits;
  TeamSide side = TeamSide::home;

  std::size_t count() const { return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), true)); }
};

inline ShiftVector build_shift_vector(const std::set<int>& jerseys, TeamSide side,
                                      const ClassSpace& classes) {
  ShiftVector v{std::vector<bool>(classes.size(), false), side};
  v.bits[ClassSpace::kNullIndex] = true;
  for (int j : jerseys) {
    if (!classes.contains(j)) {
      throw std::out_of_range("build_shift_vector: jersey " + std::to_string(j) +
                              " is not in the class space");
    }
    v.bits[classes.index_of(j)] = true;
  }
  return v;
}

inline ShiftVector all_ones_vector(std::size_t classes, TeamSide side) {
  return {std::vector<bool>(classes, true), side};
}

/// Mask from the team's full game roster instead of the on-ice shifts.
inline ShiftVector roster_vector(const Rosters& rosters, TeamSide side, const ClassSpace& classes) {
  const auto& r = rosters.of(side);
  return build_shift_vector(std::set<int>(r.begin(), r.end()), side, classes);
}

/// Mean of per-window p0 vectors, renormalized to sum to one.
inline std::vector<double> aggregate_tracklet(std::span<const std::vector<double>> window_p0) {
  if (window_p0.empty()) throw std::invalid_argument("aggregate_tracklet: no windows");
  const std::size_t k = window_p0.front().size();
  std::vector<double> mean(k, 0.0);
  for (const auto& p : window_p0) {
    if (p.size() != k) throw std::invalid_argument("aggregate_tracklet: window length mismatch");
    for (std::size_t i = 0; i < k; ++i) mean[i] += p[i];
  }
  double total = 0.0;
  for (double& v : mean) {
    v /= static_cast<double>(window_p0.size());
    total += v;
  }
  if (!(total > 0.0)) throw std::invalid_argument("aggregate_tracklet: zero probability mass");
  for (double& v : mean) v /= total;
  return mean;
}

/// Argmax with ties broken towards the lowest index.
inline std::size_t argmax_lowest(std::span<const double> p) {
  if (p.empty()) throw std::invalid_argument("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.size(); ++i)
    if (p[i] > p[best]) best = i;
  return best;
}

/// argmax(p ⊙ v), lowest index on ties.
inline std::size_t masked_identity(std::span<const double> p, const ShiftVector& v) {
  if (p.size() != v.bits.size()) {
    throw std::invalid_argument("masked_identity: " + std::to_string(p.size()) +
                                " probabilities for a " + std::to_string(v.bits.size()) +
                                "-bit shift vector");
  }
  std::vector<double> masked(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) masked[i] = v.bits[i] ? p[i] : 0.0;
  return argmax_lowest(masked);
}

}  // namespace jerseyid::shiftsync
