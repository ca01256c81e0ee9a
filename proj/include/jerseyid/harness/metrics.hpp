#pragma once

#include <cstdio>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace jerseyid::harness {

inline double accuracy(std::span<const std::size_t> truth, std::span<const std::size_t> pred) {
  if (truth.size() != pred.size()) throw std::invalid_argument("accuracy: length mismatch");
  if (truth.empty()) throw std::invalid_argument("accuracy: no samples");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hit += truth[i] == pred[i];
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

/// Support-weighted mean of per-class F1 over the classes present in the
/// ground truth. A class with no true positives has F1 = 0.
inline double weighted_f1(std::span<const std::size_t> truth, std::span<const std::size_t> pred) {
  if (truth.size() != pred.size()) throw std::invalid_argument("weighted_f1: length mismatch");
  if (truth.empty()) throw std::invalid_argument("weighted_f1: no samples");
  struct Counts {
    std::size_t tp = 0, fp = 0, fn = 0, support = 0;
  };
  std::map<std::size_t, Counts> c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++c[truth[i]].support;
    if (truth[i] == pred[i]) {
      ++c[truth[i]].tp;
    } else {
      ++c[truth[i]].fn;
      ++c[pred[i]].fp;
    }
  }
  double total = 0.0;
  for (const auto& [_, k] : c) {
    if (k.support == 0) continue;
    const double denom = static_cast<double>(2 * k.tp + k.fp + k.fn);
    const double f1 = k.tp == 0 ? 0.0 : 2.0 * static_cast<double>(k.tp) / denom;
    total += static_cast<double>(k.support) * f1;
  }
  return total / static_cast<double>(truth.size());
}

struct MetricsRow {
  std::size_t iteration = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double eval_accuracy = 0.0;
  double weighted_f1 = 0.0;
  double wall_clock_s = 0.0;
};

inline std::string metrics_header() {
  return "iteration,train_loss,train_accuracy,eval_accuracy,weighted_f1";
}

/// Deterministic fields only, printed with round-trip precision. Wall-clock
/// time goes to the separate timing log.
inline std::string metrics_csv_row(const MetricsRow& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g", r.iteration, r.train_loss,
                r.train_accuracy, r.eval_accuracy, r.weighted_f1);
  return buf;
}

inline std::string timing_header() { return "iteration,wall_clock_s"; }

inline std::string timing_csv_row(const MetricsRow& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%zu,%.3f", r.iteration, r.wall_clock_s);
  return buf;
}

}  // namespace jerseyid::harness
