#pragma once

// Learned single-frame scorer: a small conv classifier over the holistic
// classes, trained on freshly rendered synthetic frames. The visibility
// score of a frame is 1 - P(null | frame).

#include <array>
#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "jerseyid/common.hpp"
#include "jerseyid/numkit/adam.hpp"
#include "jerseyid/numkit/ops.hpp"
#include "jerseyid/synthgen/tracklet.hpp"
#include "jerseyid/weaklabel/augment.hpp"
#include "jerseyid/weaklabel/labels.hpp"

namespace jerseyid::weak {

namespace nk = numkit;

struct FrameClassifierConfig {
  std::size_t crop_height = 28;
  std::size_t crop_width = 28;
  std::array<std::size_t, 3> channels = {8, 16, 32};
  std::size_t steps = 500;
  std::size_t batch = 32;
  double lr = 3e-3;
  double visible_fraction = 0.5;  // share of training frames with a legible number
  std::uint64_t seed = 11;
};

struct FrameClassifier {
  FrameClassifierConfig config;
  std::size_t classes = 0;
  std::array<nk::DiffTensor, 3> conv_weight;
  std::array<nk::DiffTensor, 3> conv_bias;
  nk::DiffTensor out_weight, out_bias;

  std::vector<nk::NamedParameter> named() const {
    std::vector<nk::NamedParameter> out;
    for (std::size_t i = 0; i < 3; ++i) {
      out.push_back({"conv" + std::to_string(i) + ".weight", conv_weight[i]});
      out.push_back({"conv" + std::to_string(i) + ".bias", conv_bias[i]});
    }
    out.push_back({"out.weight", out_weight});
    out.push_back({"out.bias", out_bias});
    return out;
  }

  /// Class probabilities, one row per frame. Frames are centre-cropped.
  nk::DiffTensor probabilities(std::span<const Frame> frames) const {
    const auto none = AugmentConfig::none(config.crop_height, config.crop_width);
    const std::size_t h = config.crop_height, w = config.crop_width;
    std::vector<double> data(frames.size() * h * w);
    for (std::size_t n = 0; n < frames.size(); ++n) {
      const Frame& f = frames[n];
      AugmentParams p;
      p.crop_row = (f.height - h) / 2;
      p.crop_col = (f.width - w) / 2;
      const Frame c = f.height == h && f.width == w ? f : apply_augment(f, none, p);
      for (std::size_t i = 0; i < h * w; ++i) data[n * h * w + i] = c.pixels[i * c.channels];
    }
    nk::DiffTensor x = nk::DiffTensor::from({frames.size(), 1, h, w}, std::move(data));
    for (std::size_t i = 0; i < 3; ++i)
      x = nk::avg_pool2(nk::relu(nk::conv2d(x, conv_weight[i], conv_bias[i], 1)));
    return nk::softmax(nk::linear(nk::global_mean_pool(x), out_weight, out_bias), 1);
  }
};

namespace detail {

inline nk::DiffTensor he_normal(nk::Shape shape, std::size_t fan_in, Rng& rng) {
  auto t = nk::DiffTensor::zeros(std::move(shape), true);
  std::normal_distribution<double> d(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  for (auto& v : t.mutable_data()) v = d(rng);
  return t;
}

}  // namespace detail

/// Trains the classifier on frames rendered with `synth`'s appearance model:
/// visible frames are labelled with their jersey, every other state is null.
inline FrameClassifier train_frame_classifier(const synth::SynthConfig& synth,
                                              const ClassSpace& classes,
                                              const FrameClassifierConfig& cfg = {}) {
  FrameClassifier m;
  m.config = cfg;
  m.classes = classes.size();
  Rng init(derive_seed(cfg.seed, seed_stream::init));
  std::size_t in_c = 1;
  for (std::size_t i = 0; i < 3; ++i) {
    m.conv_weight[i] = detail::he_normal({cfg.channels[i], in_c, 3, 3}, in_c * 9, init);
    m.conv_bias[i] = nk::DiffTensor::zeros({cfg.channels[i]}, true);
    in_c = cfg.channels[i];
  }
  m.out_weight = detail::he_normal({in_c, m.classes}, in_c, init);
  m.out_bias = nk::DiffTensor::zeros({m.classes}, true);

  auto named = m.named();
  nk::AdamState adam({cfg.lr});
  Rng rng(derive_seed(cfg.seed, seed_stream::data));
  const auto& jerseys = classes.jerseys();
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    std::vector<Frame> frames;
    std::vector<std::size_t> targets;
    for (std::size_t b = 0; b < cfg.batch; ++b) {
      const Jersey j = jerseys[uniform_index(rng, jerseys.size())];
      const auto look = synth::draw_appearance(synth, rng);
      synth::GlyphState state = synth::GlyphState::visible;
      if (uniform01(rng) >= cfg.visible_fraction) {
        const double u = uniform01(rng);
        state = u < 1.0 / 3 ? synth::GlyphState::occluded
                : u < 2.0 / 3 ? synth::GlyphState::faded
                              : synth::GlyphState::absent;
      }
      frames.push_back(synth::render_frame(synth, j, state, look, rng).frame);
      targets.push_back(state == synth::GlyphState::visible ? classes.index_of(j)
                                                            : ClassSpace::kNullIndex);
    }
    nk::zero_grad(named);
    const auto p = m.probabilities(frames);
    std::vector<nk::DiffTensor> terms;
    for (std::size_t b = 0; b < targets.size(); ++b)
      terms.push_back(nk::cross_entropy(nk::reshape(nk::slice_rows(p, b, b + 1), {m.classes}),
                                        nk::one_hot(targets[b], m.classes)));
    nk::scale(nk::add_n(terms), 1.0 / static_cast<double>(targets.size())).backward();
    nk::adam_step(adam, named);
  }
  return m;
}

inline FrameScorer model_scorer(std::shared_ptr<const FrameClassifier> m) {
  return {LabelSource::model, [m](const Tracklet& t) {
            nk::NoGradGuard guard;
            const auto p = m->probabilities(t.frames);
            std::vector<double> score(t.size());
            for (std::size_t k = 0; k < t.size(); ++k)
              score[k] = std::clamp(1.0 - p.at(k, ClassSpace::kNullIndex), 0.0, 1.0);
            return score;
          }};
}

}  // namespace jerseyid::weak
