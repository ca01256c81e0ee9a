#pragma once

// Holistic + digit-wise cross-entropies combined with learned
// homoscedastic weights: L = sum_i exp(-2 s_i) L_{i-1} + sum_i s_i.

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

#include "jerseyid/loss/labels.hpp"
#include "jerseyid/model/network.hpp"
#include "jerseyid/numkit/ops.hpp"

namespace jerseyid::loss {

namespace nk = numkit;
using model::HeadOutputs;
using numkit::DiffTensor;

struct LossOptions {
  /// When false, s_i are ignored and L = L0 + L1 + L2 (equal fixed weights).
  bool learned_weights = true;
};

struct LossBreakdown {
  DiffTensor total;
  std::array<double, 3> components{};  // L0, L1, L2 (batch means)
};

/// The three cross-entropies for one window, head i against digit i.
inline std::array<DiffTensor, 3> component_losses(const HeadOutputs& out, const LabelTriple& y) {
  return {nk::cross_entropy(out.p0, nk::one_hot(y.holistic, out.p0.numel())),
          nk::cross_entropy(out.p1, nk::one_hot(y.first_digit, out.p1.numel())),
          nk::cross_entropy(out.p2, nk::one_hot(y.second_digit, out.p2.numel()))};
}

inline DiffTensor combine(const std::array<DiffTensor, 3>& l, const LossWeights& w,
                          const LossOptions& opt) {
  if (!opt.learned_weights) return nk::add_n({l[0], l[1], l[2]});
  const std::array<const DiffTensor*, 3> s = {&w.s1, &w.s2, &w.s3};
  std::vector<DiffTensor> terms;
  for (std::size_t i = 0; i < 3; ++i) {
    terms.push_back(nk::mul(nk::exp(nk::scale(*s[i], -2.0)), l[i]));
    terms.push_back(*s[i]);
  }
  return nk::add_n(terms);
}

inline DiffTensor multitask_loss(const HeadOutputs& out, const LabelTriple& y,
                                 const LossWeights& w, const LossOptions& opt = {}) {
  return combine(component_losses(out, y), w, opt);
}

/// Batch objective: each component is averaged over the batch before weighting.
inline LossBreakdown batch_multitask_loss(std::span<const HeadOutputs> outs,
                                          std::span<const LabelTriple> ys, const LossWeights& w,
                                          const LossOptions& opt = {}) {
  if (outs.empty() || outs.size() != ys.size()) {
    throw std::invalid_argument("batch_multitask_loss: " + std::to_string(outs.size()) +
                                " outputs for " + std::to_string(ys.size()) + " labels");
  }
  std::array<std::vector<DiffTensor>, 3> parts;
  for (std::size_t b = 0; b < outs.size(); ++b) {
    auto l = component_losses(outs[b], ys[b]);
    for (std::size_t i = 0; i < 3; ++i) parts[i].push_back(l[i]);
  }
  const double inv = 1.0 / static_cast<double>(outs.size());
  std::array<DiffTensor, 3> means;
  LossBreakdown r;
  for (std::size_t i = 0; i < 3; ++i) {
    means[i] = nk::scale(nk::add_n(parts[i]), inv);
    r.components[i] = means[i].item();
  }
  r.total = combine(means, w, opt);
  return r;
}

}  // namespace jerseyid::loss
