#pragma once

#include <random>

#include "jerseyid/model/config.hpp"
#include "jerseyid/synthgen/types.hpp"
#include "jerseyid/weaklabel/sampling.hpp"

namespace fixtures {

using jerseyid::synth::Frame;
using jerseyid::weak::SampledWindow;

inline Frame random_frame(std::size_t h, std::size_t w, std::mt19937_64& rng) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Frame f(h, w, 1);
  for (auto& v : f.pixels) v = u(rng);
  return f;
}

inline SampledWindow random_window(const jerseyid::model::ModelConfig& cfg, std::size_t n,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SampledWindow w;
  for (std::size_t i = 0; i < n; ++i) {
    w.frames.push_back(random_frame(cfg.frame_height, cfg.frame_width, rng));
    w.indices.push_back(i);
  }
  return w;
}

/// The small configuration used for finite-difference checks.
inline jerseyid::model::ModelConfig tiny_config() {
  jerseyid::model::ModelConfig c;
  c.frame_height = 16;
  c.frame_width = 16;
  c.window = 3;
  c.d = 8;
  c.layers = 1;
  c.heads = 2;
  c.head_dim = 4;
  c.classes = 5;
  return c;
}

}  // namespace fixtures
