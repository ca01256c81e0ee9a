#pragma once

// Approximate frame-level visibility labels: score every frame with a
// jersey-number model and keep the frames that clear a threshold.

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "jerseyid/synthgen/types.hpp"

namespace jerseyid::weak {

using synth::Frame;
using synth::Tracklet;

enum class LabelSource { oracle, model };

inline std::string_view to_string(LabelSource s) { return s == LabelSource::oracle ? "oracle" : "model"; }

struct FrameLabels {
  std::vector<bool> bits;
  LabelSource source = LabelSource::oracle;
  double phi = 0.5;

  std::size_t size() const { return bits.size(); }
  bool any() const {
    for (bool b : bits)
      if (b) return true;
    return false;
  }
  friend bool operator==(const FrameLabels&, const FrameLabels&) = default;
};

/// Per-frame probability that a jersey number is visible, one value per
/// frame of the tracklet.
struct FrameScorer {
  LabelSource source = LabelSource::model;
  std::function<std::vector<double>(const Tracklet&)> score;
};

/// Scores frames with the synthetic ground truth (1 visible, 0 otherwise).
inline FrameScorer oracle_scorer() {
  return {LabelSource::oracle, [](const Tracklet& t) {
            std::vector<double> p(t.size());
            for (std::size_t k = 0; k < p.size(); ++k) p[k] = t.visibility[k] ? 1.0 : 0.0;
            return p;
          }};
}

/// b_k = 1 iff p_k > phi (strict).
inline FrameLabels threshold_scores(const std::vector<double>& scores, double phi,
                                    LabelSource source) {
  if (!(phi > 0.0 && phi < 1.0)) {
    throw std::invalid_argument("approx_labels: threshold phi must lie in (0, 1)");
  }
  FrameLabels out{std::vector<bool>(scores.size()), source, phi};
  for (std::size_t k = 0; k < scores.size(); ++k) {
    const double p = scores[k];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("approx_labels: scorer output " + std::to_string(p) +
                                  " at frame " + std::to_string(k) + " outside [0, 1]");
    }
    out.bits[k] = p > phi;
  }
  return out;
}

inline FrameLabels approx_labels(const Tracklet& t, const FrameScorer& scorer, double phi = 0.5) {
  const auto scores = scorer.score(t);
  if (scores.size() != t.size()) {
    throw std::invalid_argument("approx_labels: scorer returned " + std::to_string(scores.size()) +
                                " scores for " + std::to_string(t.size()) + " frames");
  }
  return threshold_scores(scores, phi, scorer.source);
}

// ---------------------------------------------------------------------------
// Label cache: JSON lines {"tracklet_id", "phi", "source", "bits"}.

using LabelCache = std::map<std::string, FrameLabels>;

inline void write_label_cache(const std::filesystem::path& path, const LabelCache& cache) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error(path.string() + ": cannot open for writing");
  for (const auto& [id, labels] : cache) {
    std::string bits(labels.bits.size(), '0');
    for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = labels.bits[i] ? '1' : '0';
    os << nlohmann::json{{"tracklet_id", id},
                         {"phi", labels.phi},
                         {"source", std::string(to_string(labels.source))},
                         {"bits", bits}}
              .dump()
       << '\n';
  }
  if (!os) throw std::runtime_error(path.string() + ": write failed");
}

inline LabelCache read_label_cache(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error(path.string() + ": cannot open label cache");
  LabelCache cache;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.filename().string() + ":" + std::to_string(lineno);
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(where + ": " + e.what());
    }
    for (const char* key : {"tracklet_id", "phi", "bits"}) {
      if (!obj.contains(key)) throw std::runtime_error(where + ": missing field '" + key + "'");
    }
    if (!obj["tracklet_id"].is_string() || !obj["phi"].is_number() || !obj["bits"].is_string()) {
      throw std::runtime_error(where + ": malformed label record");
    }
    FrameLabels labels;
    labels.phi = obj["phi"].get<double>();
    labels.source = obj.value("source", std::string("model")) == "oracle" ? LabelSource::oracle
                                                                          : LabelSource::model;
    for (char c : obj["bits"].get<std::string>()) {
      if (c != '0' && c != '1') throw std::runtime_error(where + ": field 'bits' must be 0/1");
      labels.bits.push_back(c == '1');
    }
    cache.emplace(obj["tracklet_id"].get<std::string>(), std::move(labels));
  }
  return cache;
}

}  // namespace jerseyid::weak
