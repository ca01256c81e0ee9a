#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "jerseyid/model/config.hpp"
#include "jerseyid/synthgen/types.hpp"
#include "jerseyid/weaklabel/augment.hpp"

namespace jerseyid::synth {
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(
    SynthConfig, classes, frame_height, frame_width, min_length, max_length, min_visibility,
    max_visibility, visibility_runs, occlusion_probability, fade_probability, rotation_jitter_deg,
    null_fraction, referee_fraction, min_contrast, max_contrast, noise_sigma, position_jitter,
    roster_size, game_length_s, frames_per_second, train_tracklets, test_tracklets, seed)
}  // namespace jerseyid::synth

namespace jerseyid::weak {
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(AugmentConfig, crop_height, crop_width,
                                                max_rotation_deg, max_crop_shift,
                                                brightness_jitter, contrast_jitter)
}  // namespace jerseyid::weak

namespace jerseyid::harness {

enum class SamplingMode { approx_labels, uniform };
enum class MaskMode { shifts, roster, none };

NLOHMANN_JSON_SERIALIZE_ENUM(SamplingMode, {{SamplingMode::approx_labels, "approx_labels"},
                                            {SamplingMode::uniform, "uniform"}})
NLOHMANN_JSON_SERIALIZE_ENUM(MaskMode, {{MaskMode::shifts, "shifts"},
                                        {MaskMode::roster, "roster"},
                                        {MaskMode::none, "none"}})

inline std::string to_string(SamplingMode m) {
  return m == SamplingMode::approx_labels ? "approx_labels" : "uniform";
}
inline std::string to_string(MaskMode m) {
  return m == MaskMode::shifts ? "shifts" : m == MaskMode::roster ? "roster" : "none";
}
inline SamplingMode sampling_mode_from_string(const std::string& s) {
  if (s == "approx_labels") return SamplingMode::approx_labels;
  if (s == "uniform") return SamplingMode::uniform;
  throw std::invalid_argument("unknown sampling mode '" + s + "' (approx_labels|uniform)");
}
inline MaskMode mask_mode_from_string(const std::string& s) {
  if (s == "shifts") return MaskMode::shifts;
  if (s == "roster") return MaskMode::roster;
  if (s == "none") return MaskMode::none;
  throw std::invalid_argument("unknown mask mode '" + s + "' (shifts|roster|none)");
}

struct RunConfig {
  model::ModelConfig model;
  synth::SynthConfig synth;
  weak::AugmentConfig augment;
  double phi = 0.5;
  double p_s = 0.1;
  double lr = 3e-4;
  std::size_t batch = 16;
  double lr_decay = 0.2;
  std::vector<std::size_t> lr_milestones = {2500, 5000};
  std::size_t iterations = 6000;
  std::uint64_t seed = 1;
  SamplingMode sampling = SamplingMode::approx_labels;
  MaskMode mask = MaskMode::shifts;
  bool learned_loss_weights = true;
  std::size_t log_every = 50;
  std::size_t eval_every = 50;  // must be a multiple of log_every
  double convergence_threshold = 0.8;
  bool stop_at_threshold = false;

  /// Learning rate in effect at 1-based iteration `it`: decayed once for
  /// every milestone strictly below it.
  double lr_at(std::size_t it) const {
    double v = lr;
    for (std::size_t m : lr_milestones)
      if (it > m) v *= lr_decay;
    return v;
  }

  void validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("run config: " + what); };
    model.validate();
    synth.validate();
    if (model.classes != synth.classes) fail("model.classes must equal synth.classes");
    if (augment.crop_height != model.frame_height || augment.crop_width != model.frame_width)
      fail("augment crop must match the model input size");
    if (augment.crop_height > synth.frame_height || augment.crop_width > synth.frame_width)
      fail("augment crop exceeds the synthetic frame size");
    if (!(phi > 0.0 && phi < 1.0)) fail("phi must lie in (0, 1)");
    if (!(p_s >= 0.0 && p_s <= 1.0)) fail("p_s must lie in [0, 1]");
    if (!(lr > 0.0)) fail("lr must be positive");
    if (!(lr_decay > 0.0 && lr_decay <= 1.0)) fail("lr_decay must lie in (0, 1]");
    for (std::size_t i = 1; i < lr_milestones.size(); ++i)
      if (lr_milestones[i] <= lr_milestones[i - 1]) fail("lr milestones must be strictly increasing");
    if (batch == 0) fail("batch must be positive");
    if (iterations == 0) fail("iterations must be positive");
    if (log_every == 0 || eval_every == 0 || eval_every % log_every != 0)
      fail("eval_every must be a positive multiple of log_every");
    if (!(convergence_threshold > 0.0 && convergence_threshold <= 1.0))
      fail("convergence_threshold must lie in (0, 1]");
  }
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(RunConfig, model, synth, augment, phi, p_s, lr,
                                                batch, lr_decay, lr_milestones, iterations, seed,
                                                sampling, mask, learned_loss_weights, log_every,
                                                eval_every, convergence_threshold,
                                                stop_at_threshold)

/// Parses a RunConfig, rejecting unknown top-level keys and bad enum names.
inline RunConfig run_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("run config must be a JSON object");
  static const std::set<std::string> known = {
      "model",      "synth",         "augment",   "phi",  "p_s",
      "lr",         "batch",         "lr_decay",  "lr_milestones", "iterations",
      "seed",       "sampling",      "mask",      "learned_loss_weights",
      "log_every",  "eval_every",    "convergence_threshold", "stop_at_threshold"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw std::invalid_argument("run config: unknown key '" + key + "'");
  if (j.contains("sampling")) sampling_mode_from_string(j.at("sampling").get<std::string>());
  if (j.contains("mask")) mask_mode_from_string(j.at("mask").get<std::string>());
  RunConfig cfg = j.get<RunConfig>();
  cfg.validate();
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

}  // namespace jerseyid::harness
