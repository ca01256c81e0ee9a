#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "jerseyid/numkit.hpp"

namespace fdcheck {

using jerseyid::numkit::DiffTensor;

struct Report {
  std::string name;
  double rel_error = 0.0;  // ||analytic - numeric|| / max(||analytic||, ||numeric||)
  double analytic_norm = 0.0;
};

/// Central differences of a scalar function against the reverse sweep, one
/// report per input tensor.
inline std::vector<Report> check(std::vector<std::pair<std::string, DiffTensor>> inputs,
                                 const std::function<DiffTensor()>& f, double h = 1e-6) {
  for (auto& [_, t] : inputs) t.zero_grad();
  f().backward();
  std::vector<Report> out;
  for (auto& [name, t] : inputs) {
    std::vector<double> analytic(t.numel(), 0.0);
    if (t.has_grad()) std::copy(t.grad().begin(), t.grad().end(), analytic.begin());
    double diff = 0.0, na = 0.0, nn = 0.0;
    auto data = t.mutable_data();
    for (std::size_t i = 0; i < t.numel(); ++i) {
      const double orig = data[i];
      double fp, fm;
      {
        jerseyid::numkit::NoGradGuard guard;
        data[i] = orig + h;
        fp = f().item();
        data[i] = orig - h;
        fm = f().item();
      }
      data[i] = orig;
      const double numeric = (fp - fm) / (2 * h);
      diff += (analytic[i] - numeric) * (analytic[i] - numeric);
      na += analytic[i] * analytic[i];
      nn += numeric * numeric;
    }
    const double denom = std::max({std::sqrt(na), std::sqrt(nn), 1e-12});
    out.push_back({name, std::sqrt(diff) / denom, std::sqrt(na)});
  }
  return out;
}

}  // namespace fdcheck
