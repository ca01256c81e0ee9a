#pragma once

// Frame embedder -> [class]-token transformer encoder -> three
// layernorm + linear heads (holistic number, first digit, second digit).

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "jerseyid/model/config.hpp"
#include "jerseyid/model/params.hpp"
#include "jerseyid/numkit/ops.hpp"
#include "jerseyid/synthgen/types.hpp"
#include "jerseyid/weaklabel/sampling.hpp"

namespace jerseyid::model {

namespace nk = numkit;
using synth::Frame;
using weak::SampledWindow;

struct HeadOutputs {
  DiffTensor p0;  // [K]
  DiffTensor p1;  // [11]
  DiffTensor p2;  // [11]
};

class NonFiniteActivation : public std::runtime_error {
 public:
  explicit NonFiniteActivation(std::size_t layer)
      : std::runtime_error("non-finite activation after encoder layer " + std::to_string(layer)),
        layer_(layer) {}
  std::size_t layer() const { return layer_; }

 private:
  std::size_t layer_;
};

/// Optional probe filled by encode(): attention matrices per layer and head.
struct EncodeTrace {
  std::vector<DiffTensor> attention;  // [(m+1) x (m+1)], row-stochastic
};

/// Stacks frames into [N, C, H, W] doubles.
inline DiffTensor frames_to_tensor(std::span<const Frame> frames, const ModelConfig& cfg) {
  const std::size_t h = cfg.frame_height, w = cfg.frame_width, c = cfg.frame_channels;
  std::vector<double> data(frames.size() * c * h * w);
  for (std::size_t n = 0; n < frames.size(); ++n) {
    const Frame& f = frames[n];
    if (f.height != h || f.width != w || f.channels != c) {
      throw nk::ShapeError("embed_frames: frame " + std::to_string(n) + " is " +
                           std::to_string(f.height) + "x" + std::to_string(f.width) + "x" +
                           std::to_string(f.channels) + ", model expects " + std::to_string(h) +
                           "x" + std::to_string(w) + "x" + std::to_string(c));
    }
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t r = 0; r < h; ++r)
        for (std::size_t col = 0; col < w; ++col)
          data[((n * c + ch) * h + r) * w + col] = f.at(r, col, ch);
  }
  return DiffTensor::from({frames.size(), c, h, w}, std::move(data));
}

/// Per-frame features F, one row of width d per frame.
inline DiffTensor embed_frames(std::span<const Frame> frames, const ModelParams& p,
                               const ModelConfig& cfg) {
  if (frames.empty()) throw nk::ShapeError("embed_frames: no frames");
  DiffTensor x = frames_to_tensor(frames, cfg);
  for (std::size_t i = 0; i < 3; ++i)
    x = nk::avg_pool2(nk::relu(nk::conv2d(x, p.conv_weight[i], p.conv_bias[i], 1)));
  return nk::linear(nk::global_mean_pool(x), p.embed_weight, p.embed_bias);
}

inline DiffTensor multi_head_attention(const DiffTensor& x, const EncoderLayerParams& p,
                                       const ModelConfig& cfg, EncodeTrace* trace) {
  const DiffTensor q = nk::linear(x, p.wq, p.bq);
  const DiffTensor k = nk::linear(x, p.wk, p.bk);
  const DiffTensor v = nk::linear(x, p.wv, p.bv);
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.head_dim));
  std::vector<DiffTensor> heads;
  heads.reserve(cfg.heads);
  for (std::size_t h = 0; h < cfg.heads; ++h) {
    const std::size_t b = h * cfg.head_dim, e = b + cfg.head_dim;
    const DiffTensor qh = nk::slice_cols(q, b, e);
    const DiffTensor kh = nk::slice_cols(k, b, e);
    const DiffTensor vh = nk::slice_cols(v, b, e);
    const DiffTensor attn = nk::softmax(nk::scale(nk::matmul(qh, nk::transpose(kh)), scale), 1);
    if (trace) trace->attention.push_back(attn);
    heads.push_back(nk::matmul(attn, vh));
  }
  return nk::linear(nk::concat_cols(heads), p.wo, p.bo);
}

/// Pre-norm encoder layer: x + MHA(LN(x)), then x + MLP(LN(x)).
inline DiffTensor encoder_layer(const DiffTensor& x, const EncoderLayerParams& p,
                                const ModelConfig& cfg, EncodeTrace* trace) {
  const DiffTensor a =
      nk::add(x, multi_head_attention(nk::layer_norm(x, p.ln1_gain, p.ln1_bias, cfg.ln_eps), p,
                                      cfg, trace));
  const DiffTensor hidden =
      nk::gelu(nk::linear(nk::layer_norm(a, p.ln2_gain, p.ln2_bias, cfg.ln_eps), p.mlp_w1,
                          p.mlp_b1));
  return nk::add(a, nk::linear(hidden, p.mlp_w2, p.mlp_b2));
}

/// Final [class]-token state for an [m x d] feature sequence.
inline DiffTensor encode(const DiffTensor& features, const ModelParams& p, const ModelConfig& cfg,
                         EncodeTrace* trace = nullptr) {
  if (features.rank() != 2 || features.dim(0) != cfg.window || features.dim(1) != cfg.d) {
    throw nk::ShapeError("encode: features " + nk::shape_str(features.shape()) + ", expected [" +
                         std::to_string(cfg.window) + "x" + std::to_string(cfg.d) + "]");
  }
  DiffTensor x = nk::add(
      nk::concat_rows({nk::reshape(p.class_token, {1, cfg.d}), features}), p.positional);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    x = encoder_layer(x, p.layers[l], cfg, trace);
    for (double v : x.data())
      if (!std::isfinite(v)) throw NonFiniteActivation(l);
  }
  return nk::reshape(nk::slice_rows(x, 0, 1), {cfg.d});
}

inline DiffTensor head_probabilities(const DiffTensor& z, const HeadParams& h,
                                     const ModelConfig& cfg) {
  const std::size_t out = h.bias.dim(0);
  const DiffTensor n = nk::reshape(nk::layer_norm(z, h.ln_gain, h.ln_bias, cfg.ln_eps), {1, cfg.d});
  return nk::softmax(nk::reshape(nk::linear(n, h.weight, h.bias), {out}), 0);
}

inline HeadOutputs heads(const DiffTensor& z, const ModelParams& p, const ModelConfig& cfg) {
  if (z.shape() != nk::Shape{cfg.d}) {
    throw nk::ShapeError("heads: input " + nk::shape_str(z.shape()) + ", expected [" +
                         std::to_string(cfg.d) + "]");
  }
  return {head_probabilities(z, p.heads[0], cfg), head_probabilities(z, p.heads[1], cfg),
          head_probabilities(z, p.heads[2], cfg)};
}

namespace detail {

inline std::vector<Frame> padded_frames(const SampledWindow& w, const ModelConfig& cfg) {
  if (w.frames.empty()) throw nk::ShapeError("forward: empty window");
  if (w.frames.size() > cfg.window) {
    throw nk::ShapeError("forward: window of " + std::to_string(w.frames.size()) +
                         " frames exceeds m=" + std::to_string(cfg.window));
  }
  std::vector<Frame> frames = w.frames;
  while (frames.size() < cfg.window) frames.push_back(frames.back());
  return frames;
}

}  // namespace detail

/// Batched forward pass; all frames of all windows share one embedder call.
inline std::vector<HeadOutputs> forward_batch(std::span<const SampledWindow> windows,
                                              const ModelParams& p, const ModelConfig& cfg) {
  std::vector<Frame> frames;
  frames.reserve(windows.size() * cfg.window);
  for (const auto& w : windows) {
    auto padded = detail::padded_frames(w, cfg);
    frames.insert(frames.end(), std::make_move_iterator(padded.begin()),
                  std::make_move_iterator(padded.end()));
  }
  const DiffTensor features = embed_frames(frames, p, cfg);
  std::vector<HeadOutputs> out;
  out.reserve(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const DiffTensor f = nk::slice_rows(features, i * cfg.window, (i + 1) * cfg.window);
    out.push_back(heads(encode(f, p, cfg), p, cfg));
  }
  return out;
}

inline HeadOutputs forward(const SampledWindow& window, const ModelParams& p,
                           const ModelConfig& cfg) {
  return forward_batch(std::span<const SampledWindow>(&window, 1), p, cfg).front();
}

}  // namespace jerseyid::model
