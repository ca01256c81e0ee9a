#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "jerseyid/common.hpp"
#include "jerseyid/harness/config.hpp"
#include "jerseyid/harness/evaluate.hpp"
#include "jerseyid/harness/metrics.hpp"
#include "jerseyid/loss/multitask.hpp"
#include "jerseyid/model/network.hpp"
#include "jerseyid/model/params.hpp"
#include "jerseyid/numkit/adam.hpp"
#include "jerseyid/shiftsync/masking.hpp"
#include "jerseyid/synthgen/types.hpp"
#include "jerseyid/weaklabel/augment.hpp"
#include "jerseyid/weaklabel/labels.hpp"
#include "jerseyid/weaklabel/sampling.hpp"

namespace jerseyid::harness {

class TrainingDiverged : public std::runtime_error {
 public:
  explicit TrainingDiverged(std::size_t iteration)
      : std::runtime_error("non-finite training loss at iteration " + std::to_string(iteration)),
        iteration_(iteration) {}
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

struct TrainResult {
  model::ModelParams params;
  std::vector<MetricsRow> rows;
  std::size_t iterations_run = 0;
  /// First logged iteration whose interval train accuracy reached the
  /// convergence threshold.
  std::optional<std::size_t> iterations_to_threshold;
};

struct TrainHooks {
  std::function<void(const MetricsRow&)> on_log;
  /// Skip periodic evaluation (rows then carry eval fields of 0).
  bool skip_eval = false;
};

/// One window per batch slot, drawn and augmented with the given streams.
inline weak::SampledWindow draw_training_window(const RunConfig& cfg, const Tracklet& t,
                                                const weak::LabelCache* labels, Rng& sampling,
                                                Rng& augment) {
  weak::SampledWindow w;
  if (cfg.sampling == SamplingMode::approx_labels) {
    const auto it = labels->find(t.id);
    if (it == labels->end())
      throw std::invalid_argument("train: no frame labels for tracklet " + t.id);
    w = weak::sample_window(t, it->second, cfg.model.window, sampling);
  } else {
    w = weak::sample_uniform_window(t, cfg.model.window, sampling);
  }
  return weak::augment_window(w, cfg.augment, augment);
}

/// Batched training loop. `labels` is required in approx_labels mode.
inline TrainResult train(const RunConfig& cfg, const synth::Dataset& ds,
                         const weak::LabelCache* labels, const TrainHooks& hooks = {}) {
  cfg.validate();
  if (cfg.sampling == SamplingMode::approx_labels && !labels)
    throw std::invalid_argument("train: approx_labels sampling needs a frame-label cache");
  if (ds.classes.size() != cfg.model.classes)
    throw std::invalid_argument("train: dataset class space does not match the model");
  if (ds.train.empty()) throw std::invalid_argument("train: empty training split");

  const auto clock_start = std::chrono::steady_clock::now();
  TrainResult result;
  result.params = model::init_params(cfg.model, derive_seed(cfg.seed, seed_stream::init));
  auto named = result.params.named();
  numkit::AdamState adam({cfg.lr});
  const weak::TrackletSampler sampler(ds.train, cfg.p_s);
  Rng sampling_rng(derive_seed(cfg.seed, seed_stream::sampling));
  Rng augment_rng(derive_seed(cfg.seed, seed_stream::augment));
  const loss::LossOptions loss_opts{cfg.learned_loss_weights};
  const EvalContext eval_ctx{&ds.classes, &ds.rosters, &ds.shifts};

  double interval_loss = 0.0;
  std::size_t interval_hits = 0, interval_samples = 0, interval_steps = 0;
  ModeScores last_eval;

  for (std::size_t it = 1; it <= cfg.iterations; ++it) {
    std::vector<weak::SampledWindow> windows;
    std::vector<loss::LabelTriple> ys;
    windows.reserve(cfg.batch);
    for (std::size_t b = 0; b < cfg.batch; ++b) {
      const Tracklet& t = sampler.draw(sampling_rng);
      windows.push_back(draw_training_window(cfg, t, labels, sampling_rng, augment_rng));
      ys.push_back(loss::encode_labels(t.label, ds.classes));
    }

    numkit::zero_grad(named);
    const auto outs = model::forward_batch(windows, result.params, cfg.model);
    const auto l = loss::batch_multitask_loss(outs, ys, result.params.loss_weights, loss_opts);
    const double lv = l.total.item();
    if (!std::isfinite(lv)) throw TrainingDiverged(it);
    l.total.backward();
    adam.options.lr = cfg.lr_at(it);
    numkit::adam_step(adam, named);

    interval_loss += lv;
    ++interval_steps;
    for (std::size_t b = 0; b < outs.size(); ++b)
      interval_hits += shiftsync::argmax_lowest(outs[b].p0.data()) == ys[b].holistic;
    interval_samples += outs.size();
    result.iterations_run = it;

    if (it % cfg.log_every == 0 || it == cfg.iterations) {
      MetricsRow row;
      row.iteration = it;
      row.train_loss = interval_loss / static_cast<double>(interval_steps);
      row.train_accuracy =
          static_cast<double>(interval_hits) / static_cast<double>(interval_samples);
      if (!hooks.skip_eval && !ds.test.empty() &&
          (it % cfg.eval_every == 0 || it == cfg.iterations)) {
        last_eval = evaluate(result.params, cfg.model, ds.test, eval_ctx, cfg.mask).selected();
      }
      row.eval_accuracy = last_eval.accuracy;
      row.weighted_f1 = last_eval.weighted_f1;
      row.wall_clock_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
      result.rows.push_back(row);
      if (hooks.on_log) hooks.on_log(row);
      interval_loss = 0.0;
      interval_hits = interval_samples = interval_steps = 0;
      if (!result.iterations_to_threshold && row.train_accuracy >= cfg.convergence_threshold) {
        result.iterations_to_threshold = it;
        if (cfg.stop_at_threshold) break;
      }
    }
  }
  return result;
}

/// Frame labels for every tracklet of a split.
inline weak::LabelCache build_label_cache(std::span<const Tracklet> tracklets,
                                          const weak::FrameScorer& scorer, double phi) {
  weak::LabelCache cache;
  for (const auto& t : tracklets) cache[t.id] = weak::approx_labels(t, scorer, phi);
  return cache;
}

}  // namespace jerseyid::harness
