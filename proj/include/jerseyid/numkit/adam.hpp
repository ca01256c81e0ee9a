#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "jerseyid/numkit/tensor.hpp"

namespace jerseyid::numkit {

struct NamedParameter {
  std::string name;
  DiffTensor tensor;
};

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Moment buffers are created lazily on the first step and indexed like the
/// parameter list passed to adam_step; callers must keep that order stable.
struct AdamState {
  AdamOptions options;
  std::size_t step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;

  explicit AdamState(AdamOptions opts = {}) : options(opts) {
    if (!(opts.lr > 0.0)) throw std::invalid_argument("adam: learning rate must be positive");
  }
};

class NonFiniteGradient : public std::runtime_error {
 public:
  explicit NonFiniteGradient(const std::string& param)
      : std::runtime_error("non-finite gradient in parameter '" + param + "'"), param_(param) {}
  const std::string& parameter() const { return param_; }

 private:
  std::string param_;
};

/// One bias-corrected Adam update using each parameter's accumulated grad
/// (a parameter with no grad buffer is treated as a zero gradient). All
/// gradients are validated before any parameter is touched.
inline void adam_step(AdamState& state, std::span<NamedParameter> params) {
  for (const auto& p : params) {
    for (double g : p.tensor.grad()) {
      if (!std::isfinite(g)) throw NonFiniteGradient(p.name);
    }
  }
  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.tensor.numel(), 0.0);
      state.second_moment.emplace_back(p.tensor.numel(), 0.0);
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw std::invalid_argument("adam: parameter list changed between steps");
  }

  ++state.step;
  const auto& o = state.options;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(o.beta1, t);
  const double c2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& tensor = params[i].tensor;
    if (state.first_moment[i].size() != tensor.numel()) {
      throw std::invalid_argument("adam: moment shape mismatch for '" + params[i].name + "'");
    }
    auto data = tensor.mutable_data();
    const auto grad = tensor.grad();
    const bool has_grad = !grad.empty();
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    for (std::size_t j = 0; j < data.size(); ++j) {
      const double g = has_grad ? grad[j] : 0.0;
      m[j] = o.beta1 * m[j] + (1.0 - o.beta1) * g;
      v[j] = o.beta2 * v[j] + (1.0 - o.beta2) * g * g;
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      data[j] -= o.lr * mhat / (std::sqrt(vhat) + o.eps);
    }
  }
}

inline void zero_grad(std::span<NamedParameter> params) {
  for (auto& p : params) p.tensor.zero_grad();
}

}  // namespace jerseyid::numkit
