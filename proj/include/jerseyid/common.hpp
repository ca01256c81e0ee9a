#pragma once

// Vocabulary shared by every module: team sides, the holistic class space
// and seeded randomness.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace jerseyid {

enum class TeamSide { home, away, referee };

inline std::string_view to_string(TeamSide side) {
  switch (side) {
    case TeamSide::home: return "home";
    case TeamSide::away: return "away";
    case TeamSide::referee: return "referee";
  }
  return "?";
}

inline TeamSide team_side_from_string(std::string_view s) {
  if (s == "home") return TeamSide::home;
  if (s == "away") return TeamSide::away;
  if (s == "referee") return TeamSide::referee;
  throw std::invalid_argument("unknown team side '" + std::string(s) + "'");
}

/// A jersey number, or nullopt for the null class.
using Jersey = std::optional<int>;

inline std::string jersey_str(const Jersey& j) { return j ? std::to_string(*j) : "null"; }

/// Fixed ordering of the holistic classes: index 0 is null, index i >= 1 is
/// jerseys[i - 1].
class ClassSpace {
 public:
  ClassSpace() = default;

  explicit ClassSpace(std::vector<int> jerseys) : jerseys_(std::move(jerseys)) {
    std::vector<int> sorted = jerseys_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw std::invalid_argument("class space has duplicate jerseys");
    }
    for (int j : jerseys_) {
      if (j < 0 || j > 99) {
        throw std::invalid_argument("jersey " + std::to_string(j) + " is not a 1-2 digit number");
      }
    }
  }

  /// Null plus jerseys 1..classes-1.
  static ClassSpace sequential(std::size_t classes) {
    if (classes < 2 || classes > 100) {
      throw std::invalid_argument("class count must be in [2, 100], got " +
                                  std::to_string(classes));
    }
    std::vector<int> j(classes - 1);
    for (std::size_t i = 0; i < j.size(); ++i) j[i] = static_cast<int>(i + 1);
    return ClassSpace(std::move(j));
  }

  std::size_t size() const { return jerseys_.size() + 1; }
  const std::vector<int>& jerseys() const { return jerseys_; }

  bool contains(int jersey) const {
    return std::find(jerseys_.begin(), jerseys_.end(), jersey) != jerseys_.end();
  }

  std::size_t index_of(const Jersey& jersey) const {
    if (!jersey) return kNullIndex;
    auto it = std::find(jerseys_.begin(), jerseys_.end(), *jersey);
    if (it == jerseys_.end()) {
      throw std::out_of_range("jersey " + std::to_string(*jersey) + " is not in the roster");
    }
    return static_cast<std::size_t>(it - jerseys_.begin()) + 1;
  }

  Jersey jersey_at(std::size_t index) const {
    if (index >= size()) throw std::out_of_range("class index " + std::to_string(index));
    if (index == kNullIndex) return std::nullopt;
    return jerseys_[index - 1];
  }

  static constexpr std::size_t kNullIndex = 0;

  friend bool operator==(const ClassSpace&, const ClassSpace&) = default;

 private:
  std::vector<int> jerseys_;
};

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent child seed for (stream, index) under a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index = 0) {
  return splitmix64(splitmix64(master ^ splitmix64(stream)) + index);
}

/// Named streams split off a master seed.
namespace seed_stream {
inline constexpr std::uint64_t data = 1;
inline constexpr std::uint64_t init = 2;
inline constexpr std::uint64_t augment = 3;
inline constexpr std::uint64_t sampling = 4;
inline constexpr std::uint64_t shifts = 5;
inline constexpr std::uint64_t eval = 6;
}  // namespace seed_stream

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Uniform integer in [0, n).
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index over empty range");
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace jerseyid
