#pragma once

#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "jerseyid/common.hpp"
#include "jerseyid/loss/labels.hpp"
#include "jerseyid/model/config.hpp"
#include "jerseyid/numkit/adam.hpp"
#include "jerseyid/numkit/tensor.hpp"

namespace jerseyid::model {

using numkit::DiffTensor;
using numkit::NamedParameter;

struct EncoderLayerParams {
  DiffTensor ln1_gain, ln1_bias;
  DiffTensor wq, bq, wk, bk, wv, bv;  // d -> h*D_h
  DiffTensor wo, bo;                  // h*D_h -> d
  DiffTensor ln2_gain, ln2_bias;
  DiffTensor mlp_w1, mlp_b1;  // d -> mlp_ratio*d
  DiffTensor mlp_w2, mlp_b2;  // mlp_ratio*d -> d
};

struct HeadParams {
  DiffTensor ln_gain, ln_bias;
  DiffTensor weight, bias;  // d -> classes
};

struct ModelParams {
  std::array<DiffTensor, 3> conv_weight;
  std::array<DiffTensor, 3> conv_bias;
  DiffTensor embed_weight, embed_bias;  // last conv channels -> d
  DiffTensor class_token;               // [d]
  DiffTensor positional;                // [(m+1) x d], row 0 is the class-token slot
  std::vector<EncoderLayerParams> layers;
  std::array<HeadParams, 3> heads;  // holistic, first digit, second digit
  loss::LossWeights loss_weights;

  /// Every learnable tensor with a stable, unique name. The order defines
  /// optimizer state and checkpoint layout.
  std::vector<NamedParameter> named() const {
    std::vector<NamedParameter> out;
    for (std::size_t i = 0; i < 3; ++i) {
      out.push_back({"embed.conv" + std::to_string(i) + ".weight", conv_weight[i]});
      out.push_back({"embed.conv" + std::to_string(i) + ".bias", conv_bias[i]});
    }
    out.push_back({"embed.proj.weight", embed_weight});
    out.push_back({"embed.proj.bias", embed_bias});
    out.push_back({"encoder.class_token", class_token});
    out.push_back({"encoder.positional", positional});
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& p = layers[l];
      const std::string pre = "encoder.layer" + std::to_string(l) + ".";
      out.push_back({pre + "ln1.gain", p.ln1_gain});
      out.push_back({pre + "ln1.bias", p.ln1_bias});
      out.push_back({pre + "attn.wq", p.wq});
      out.push_back({pre + "attn.bq", p.bq});
      out.push_back({pre + "attn.wk", p.wk});
      out.push_back({pre + "attn.bk", p.bk});
      out.push_back({pre + "attn.wv", p.wv});
      out.push_back({pre + "attn.bv", p.bv});
      out.push_back({pre + "attn.wo", p.wo});
      out.push_back({pre + "attn.bo", p.bo});
      out.push_back({pre + "ln2.gain", p.ln2_gain});
      out.push_back({pre + "ln2.bias", p.ln2_bias});
      out.push_back({pre + "mlp.w1", p.mlp_w1});
      out.push_back({pre + "mlp.b1", p.mlp_b1});
      out.push_back({pre + "mlp.w2", p.mlp_w2});
      out.push_back({pre + "mlp.b2", p.mlp_b2});
    }
    static constexpr std::array<const char*, 3> kHeadNames = {"holistic", "digit1", "digit2"};
    for (std::size_t i = 0; i < 3; ++i) {
      const std::string pre = std::string("head.") + kHeadNames[i] + ".";
      out.push_back({pre + "ln.gain", heads[i].ln_gain});
      out.push_back({pre + "ln.bias", heads[i].ln_bias});
      out.push_back({pre + "weight", heads[i].weight});
      out.push_back({pre + "bias", heads[i].bias});
    }
    out.push_back({"loss.s1", loss_weights.s1});
    out.push_back({"loss.s2", loss_weights.s2});
    out.push_back({"loss.s3", loss_weights.s3});
    return out;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : named()) n += p.tensor.numel();
    return n;
  }
};

namespace detail {

inline DiffTensor normal_tensor(numkit::Shape shape, double stddev, Rng& rng) {
  auto t = DiffTensor::zeros(std::move(shape), true);
  std::normal_distribution<double> dist(0.0, stddev);
  for (auto& v : t.mutable_data()) v = dist(rng);
  return t;
}

inline DiffTensor zeros(numkit::Shape shape) { return DiffTensor::zeros(std::move(shape), true); }
inline DiffTensor ones(numkit::Shape shape) { return DiffTensor::full(std::move(shape), 1.0, true); }

/// Glorot-normal weight for a [fan_in x fan_out] linear map.
inline DiffTensor dense(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  return normal_tensor({fan_in, fan_out},
                       std::sqrt(2.0 / static_cast<double>(fan_in + fan_out)), rng);
}

}  // namespace detail

inline ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  ModelParams p;
  std::size_t in_c = cfg.frame_channels;
  for (std::size_t i = 0; i < 3; ++i) {
    const std::size_t out_c = cfg.embed_channels[i];
    p.conv_weight[i] = detail::normal_tensor(
        {out_c, in_c, 3, 3}, std::sqrt(2.0 / static_cast<double>(in_c * 9)), rng);
    p.conv_bias[i] = detail::zeros({out_c});
    in_c = out_c;
  }
  p.embed_weight = detail::dense(in_c, cfg.d, rng);
  p.embed_bias = detail::zeros({cfg.d});
  p.class_token = detail::normal_tensor({cfg.d}, 0.02, rng);
  p.positional = detail::normal_tensor({cfg.window + 1, cfg.d}, 0.02, rng);

  const std::size_t aw = cfg.attention_width(), hidden = cfg.mlp_ratio * cfg.d;
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    EncoderLayerParams e;
    e.ln1_gain = detail::ones({cfg.d});
    e.ln1_bias = detail::zeros({cfg.d});
    e.wq = detail::dense(cfg.d, aw, rng);
    e.bq = detail::zeros({aw});
    e.wk = detail::dense(cfg.d, aw, rng);
    e.bk = detail::zeros({aw});
    e.wv = detail::dense(cfg.d, aw, rng);
    e.bv = detail::zeros({aw});
    e.wo = detail::dense(aw, cfg.d, rng);
    e.bo = detail::zeros({cfg.d});
    e.ln2_gain = detail::ones({cfg.d});
    e.ln2_bias = detail::zeros({cfg.d});
    e.mlp_w1 = detail::dense(cfg.d, hidden, rng);
    e.mlp_b1 = detail::zeros({hidden});
    e.mlp_w2 = detail::dense(hidden, cfg.d, rng);
    e.mlp_b2 = detail::zeros({cfg.d});
    p.layers.push_back(std::move(e));
  }
  const std::array<std::size_t, 3> outs = {cfg.classes, loss::kDigitClasses, loss::kDigitClasses};
  for (std::size_t i = 0; i < 3; ++i) {
    p.heads[i].ln_gain = detail::ones({cfg.d});
    p.heads[i].ln_bias = detail::zeros({cfg.d});
    p.heads[i].weight = detail::dense(cfg.d, outs[i], rng);
    p.heads[i].bias = detail::zeros({outs[i]});
  }
  p.loss_weights = loss::LossWeights::init(0.0);
  return p;
}

}  // namespace jerseyid::model
