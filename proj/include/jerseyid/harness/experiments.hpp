#pragma once

#include <algorithm>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "jerseyid/harness/config.hpp"
#include "jerseyid/harness/evaluate.hpp"
#include "jerseyid/harness/train.hpp"

namespace jerseyid::harness {

// ---------------------------------------------------------------------------
// Ablation grids: one axis varies, the other two are held at fixed values.

enum class AblationAxis { heads, layers, window };

inline std::string to_string(AblationAxis a) {
  return a == AblationAxis::heads ? "h" : a == AblationAxis::layers ? "l" : "m";
}

inline AblationAxis ablation_axis_from_string(const std::string& s) {
  if (s == "h" || s == "heads") return AblationAxis::heads;
  if (s == "l" || s == "layers") return AblationAxis::layers;
  if (s == "m" || s == "window") return AblationAxis::window;
  throw std::invalid_argument("unknown ablation axis '" + s + "' (h|l|m)");
}

inline std::vector<std::size_t> ablation_values(AblationAxis a) {
  switch (a) {
    case AblationAxis::heads: return {2, 4, 6, 8, 10};
    case AblationAxis::layers: return {2, 4, 6, 8};
    case AblationAxis::window: return {10, 20, 30, 40, 50};
  }
  return {};
}

/// Model shape of one grid cell: h sweeps at (l=2, m=30), l sweeps at
/// (h=8, m=30), m sweeps at (h=8, l=2).
inline model::ModelConfig ablation_cell(model::ModelConfig base, AblationAxis a, std::size_t v) {
  switch (a) {
    case AblationAxis::heads:
      base.heads = v, base.layers = 2, base.window = 30;
      break;
    case AblationAxis::layers:
      base.heads = 8, base.layers = v, base.window = 30;
      break;
    case AblationAxis::window:
      base.heads = 8, base.layers = 2, base.window = v;
      break;
  }
  return base;
}

struct AblationRow {
  AblationAxis axis = AblationAxis::heads;
  std::size_t h = 0, l = 0, m = 0;
  double accuracy = 0.0;
  double weighted_f1 = 0.0;
};

inline std::string ablation_header() { return "axis,h,l,m,accuracy,weighted_f1"; }

inline std::string ablation_csv_row(const AblationRow& r) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%zu,%.6f,%.6f", to_string(r.axis).c_str(), r.h, r.l,
                r.m, r.accuracy, r.weighted_f1);
  return buf;
}

/// Trains and evaluates every cell of one grid on `ds`.
inline std::vector<AblationRow> ablate(const RunConfig& base, AblationAxis axis,
                                       const synth::Dataset& ds, const weak::LabelCache* labels,
                                       const std::function<void(const AblationRow&)>& on_row = {}) {
  if (ds.test.empty()) throw std::invalid_argument("ablate: empty test split");
  std::vector<AblationRow> rows;
  for (std::size_t v : ablation_values(axis)) {
    RunConfig cfg = base;
    cfg.model = ablation_cell(base.model, axis, v);
    const auto trained = train(cfg, ds, labels, {{}, true});
    const EvalContext ctx{&ds.classes, &ds.rosters, &ds.shifts};
    const auto r = evaluate(trained.params, cfg.model, ds.test, ctx, cfg.mask);
    rows.push_back({axis, cfg.model.heads, cfg.model.layers, cfg.model.window, r.accuracy(),
                    r.weighted_f1()});
    if (on_row) on_row(rows.back());
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Convergence comparison between the two window-sampling modes.

struct ConvergenceRun {
  std::size_t iterations = 0;  // the budget when censored
  bool censored = false;
};

struct ConvergencePair {
  std::uint64_t seed = 0;
  ConvergenceRun approx_labels, uniform;
};

struct ConvergenceSummary {
  std::vector<ConvergencePair> pairs;
  double median_approx_labels = 0.0;
  double median_uniform = 0.0;
  std::size_t budget = 0;
};

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of an empty list");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline ConvergenceRun iterations_to_threshold(RunConfig cfg, SamplingMode mode,
                                              const synth::Dataset& ds,
                                              const weak::LabelCache* labels) {
  cfg.sampling = mode;
  cfg.stop_at_threshold = true;
  const auto r = train(cfg, ds, labels, {{}, true});
  if (r.iterations_to_threshold) return {*r.iterations_to_threshold, false};
  return {cfg.iterations, true};
}

/// For each seed, trains once per sampling mode and records the first logged
/// iteration at which interval train accuracy reaches cfg.convergence_threshold.
/// Runs that never get there are recorded at the iteration budget.
inline ConvergenceSummary convergence_compare(
    const RunConfig& cfg, const std::vector<std::uint64_t>& seeds, const synth::Dataset& ds,
    const weak::LabelCache& labels,
    const std::function<void(const ConvergencePair&)>& on_pair = {}) {
  if (seeds.empty()) throw std::invalid_argument("convergence_compare: no seeds");
  ConvergenceSummary s;
  s.budget = cfg.iterations;
  std::vector<double> a, u;
  for (std::uint64_t seed : seeds) {
    RunConfig c = cfg;
    c.seed = seed;
    ConvergencePair p{seed, iterations_to_threshold(c, SamplingMode::approx_labels, ds, &labels),
                      iterations_to_threshold(c, SamplingMode::uniform, ds, &labels)};
    a.push_back(static_cast<double>(p.approx_labels.iterations));
    u.push_back(static_cast<double>(p.uniform.iterations));
    s.pairs.push_back(p);
    if (on_pair) on_pair(p);
  }
  s.median_approx_labels = median(a);
  s.median_uniform = median(u);
  return s;
}

inline std::string convergence_header() {
  return "seed,approx_labels_iterations,approx_labels_censored,uniform_iterations,uniform_censored";
}

inline std::string convergence_csv_row(const ConvergencePair& p) {
  return std::to_string(p.seed) + "," + std::to_string(p.approx_labels.iterations) + "," +
         (p.approx_labels.censored ? "1" : "0") + "," + std::to_string(p.uniform.iterations) +
         "," + (p.uniform.censored ? "1" : "0");
}

inline nlohmann::json convergence_summary_json(const ConvergenceSummary& s) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : s.pairs) {
    pairs.push_back({{"seed", p.seed},
                     {"approx_labels", {{"iterations", p.approx_labels.iterations},
                                        {"censored", p.approx_labels.censored}}},
                     {"uniform", {{"iterations", p.uniform.iterations},
                                  {"censored", p.uniform.censored}}}});
  }
  return {{"budget", s.budget},
          {"median_approx_labels", s.median_approx_labels},
          {"median_uniform", s.median_uniform},
          {"pairs", pairs}};
}

}  // namespace jerseyid::harness
