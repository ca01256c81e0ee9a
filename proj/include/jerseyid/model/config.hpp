#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace jerseyid::model {

struct ModelConfig {
  // Input frames after cropping.
  std::size_t frame_height = 28;
  std::size_t frame_width = 28;
  std::size_t frame_channels = 1;
  // Convolutional embedder: three conv3x3 + ReLU + 2x2 mean-pool stages.
  std::array<std::size_t, 3> embed_channels = {8, 16, 32};
  std::size_t d = 64;          // feature width
  std::size_t layers = 2;      // l
  std::size_t heads = 4;       // h
  std::size_t head_dim = 64;   // D_h
  std::size_t mlp_ratio = 2;   // encoder MLP hidden width = mlp_ratio * d
  std::size_t window = 16;     // m
  std::size_t classes = 21;    // K
  double ln_eps = 1e-5;

  std::size_t attention_width() const { return heads * head_dim; }

  void validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("model config: " + what); };
    if (frame_height < 8 || frame_width < 8) fail("frames must be at least 8x8 for three pool stages");
    if (frame_channels == 0) fail("frame_channels must be positive");
    for (auto c : embed_channels)
      if (c == 0) fail("embed channels must be positive");
    if (d == 0 || heads == 0 || head_dim == 0 || mlp_ratio == 0 || window == 0)
      fail("d, h, D_h, mlp_ratio and m must be positive");
    if (classes < 2) fail("K must be >= 2");
    if (!(ln_eps > 0.0)) fail("ln_eps must be positive");
  }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;

  /// Full-scale shape: m=30, d=512, l=2, h=8, D_h=64, K=86.
  static ModelConfig full_scale() {
    ModelConfig c;
    c.window = 30;
    c.d = 512;
    c.layers = 2;
    c.heads = 8;
    c.head_dim = 64;
    c.classes = 86;
    return c;
  }
};

inline void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"frame_height", c.frame_height}, {"frame_width", c.frame_width},
                     {"frame_channels", c.frame_channels}, {"embed_channels", c.embed_channels},
                     {"d", c.d}, {"layers", c.layers}, {"heads", c.heads},
                     {"head_dim", c.head_dim}, {"mlp_ratio", c.mlp_ratio},
                     {"window", c.window}, {"classes", c.classes}, {"ln_eps", c.ln_eps}};
}

inline void from_json(const nlohmann::json& j, ModelConfig& c) {
  ModelConfig d;
  c.frame_height = j.value("frame_height", d.frame_height);
  c.frame_width = j.value("frame_width", d.frame_width);
  c.frame_channels = j.value("frame_channels", d.frame_channels);
  c.embed_channels = j.value("embed_channels", d.embed_channels);
  c.d = j.value("d", d.d);
  c.layers = j.value("layers", d.layers);
  c.heads = j.value("heads", d.heads);
  c.head_dim = j.value("head_dim", d.head_dim);
  c.mlp_ratio = j.value("mlp_ratio", d.mlp_ratio);
  c.window = j.value("window", d.window);
  c.classes = j.value("classes", d.classes);
  c.ln_eps = j.value("ln_eps", d.ln_eps);
}

}  // namespace jerseyid::model
