#pragma once

// Differentiable operations over DiffTensor. Each op computes its forward
// value eagerly and registers the closure that maps the output gradient to
// input gradients.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "jerseyid/numkit/gemm.hpp"
#include "jerseyid/numkit/tensor.hpp"

namespace jerseyid::numkit {

namespace detail {

inline void require_rank(const DiffTensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                     shape_str(t.shape()));
  }
}

inline void require_same_shape(const DiffTensor& a, const DiffTensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
}

inline void require_no_nan(const DiffTensor& t, const char* op) {
  for (double v : t.data()) {
    if (std::isnan(v)) throw std::invalid_argument(std::string(op) + ": NaN input");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Linear algebra

inline DiffTensor matmul(const DiffTensor& a, const DiffTensor& b) {
  detail::require_rank(a, 2, "matmul");
  detail::require_rank(b, 2, "matmul");
  const std::size_t n = a.dim(0), k = a.dim(1), p = b.dim(1);
  if (b.dim(0) != k) {
    throw ShapeError("matmul: inner extents disagree, " + shape_str(a.shape()) + " x " +
                     shape_str(b.shape()));
  }
  std::vector<double> out(n * p);
  kernels::gemm(false, false, n, p, k, 1.0, a.data().data(), b.data().data(), 0.0, out.data());
  return DiffTensor::make_result({n, p}, std::move(out), "matmul", {a, b},
                                 [n, k, p](const detail::Node& self) {
                                   const double* g = self.grad.data();
                                   if (double* ga = grad_sink(self, 0)) {
                                     kernels::gemm(false, true, n, k, p, 1.0, g,
                                                   parent_data(self, 1).data(), 1.0, ga);
                                   }
                                   if (double* gb = grad_sink(self, 1)) {
                                     kernels::gemm(true, false, k, p, n, 1.0,
                                                   parent_data(self, 0).data(), g, 1.0, gb);
                                   }
                                 });
}

inline DiffTensor transpose(const DiffTensor& a) {
  detail::require_rank(a, 2, "transpose");
  const std::size_t r = a.dim(0), c = a.dim(1);
  std::vector<double> out(r * c);
  const auto src = a.data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = src[i * c + j];
  return DiffTensor::make_result({c, r}, std::move(out), "transpose", {a},
                                 [r, c](const detail::Node& self) {
                                   double* ga = grad_sink(self, 0);
                                   for (std::size_t i = 0; i < r; ++i)
                                     for (std::size_t j = 0; j < c; ++j)
                                       ga[i * c + j] += self.grad[j * r + i];
                                 });
}

// ---------------------------------------------------------------------------
// Elementwise

inline DiffTensor add(const DiffTensor& a, const DiffTensor& b) {
  detail::require_same_shape(a, b, "add");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return DiffTensor::make_result(a.shape(), std::move(out), "add", {a, b},
                                 [](const detail::Node& self) {
                                   for (std::size_t p = 0; p < 2; ++p) {
                                     if (double* g = grad_sink(self, p)) {
                                       for (std::size_t i = 0; i < self.grad.size(); ++i)
                                         g[i] += self.grad[i];
                                     }
                                   }
                                 });
}

/// Adds a vector along the last axis of `a` (row-wise bias broadcast).
inline DiffTensor add_bias(const DiffTensor& a, const DiffTensor& bias) {
  if (a.rank() == 0 || bias.rank() != 1 || bias.dim(0) != a.shape().back()) {
    throw ShapeError("add_bias: bias " + shape_str(bias.shape()) + " does not fit " +
                     shape_str(a.shape()));
  }
  const std::size_t width = bias.dim(0);
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + bias[i % width];
  return DiffTensor::make_result(a.shape(), std::move(out), "add_bias", {a, bias},
                                 [width](const detail::Node& self) {
                                   if (double* ga = grad_sink(self, 0)) {
                                     for (std::size_t i = 0; i < self.grad.size(); ++i)
                                       ga[i] += self.grad[i];
                                   }
                                   if (double* gb = grad_sink(self, 1)) {
                                     for (std::size_t i = 0; i < self.grad.size(); ++i)
                                       gb[i % width] += self.grad[i];
                                   }
                                 });
}

inline DiffTensor mul(const DiffTensor& a, const DiffTensor& b) {
  detail::require_same_shape(a, b, "mul");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return DiffTensor::make_result(a.shape(), std::move(out), "mul", {a, b},
                                 [](const detail::Node& self) {
                                   const auto& av = parent_data(self, 0);
                                   const auto& bv = parent_data(self, 1);
                                   if (double* ga = grad_sink(self, 0)) {
                                     for (std::size_t i = 0; i < self.grad.size(); ++i)
                                       ga[i] += self.grad[i] * bv[i];
                                   }
                                   if (double* gb = grad_sink(self, 1)) {
                                     for (std::size_t i = 0; i < self.grad.size(); ++i)
                                       gb[i] += self.grad[i] * av[i];
                                   }
                                 });
}

inline DiffTensor scale(const DiffTensor& a, double factor) {
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * factor;
  return DiffTensor::make_result(a.shape(), std::move(out), "scale", {a},
                                 [factor](const detail::Node& self) {
                                   double* ga = grad_sink(self, 0);
                                   for (std::size_t i = 0; i < self.grad.size(); ++i)
                                     ga[i] += self.grad[i] * factor;
                                 });
}

inline DiffTensor exp(const DiffTensor& a) {
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(a[i]);
  return DiffTensor::make_result(a.shape(), std::move(out), "exp", {a},
                                 [](const detail::Node& self) {
                                   double* ga = grad_sink(self, 0);
                                   for (std::size_t i = 0; i < self.grad.size(); ++i)
                                     ga[i] += self.grad[i] * self.data[i];
                                 });
}

inline DiffTensor relu(const DiffTensor& a) {
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] > 0.0 ? a[i] : 0.0;
  return DiffTensor::make_result(a.shape(), std::move(out), "relu", {a},
                                 [](const detail::Node& self) {
                                   double* ga = grad_sink(self, 0);
                                   for (std::size_t i = 0; i < self.grad.size(); ++i)
                                     if (self.data[i] > 0.0) ga[i] += self.grad[i];
                                 });
}

/// Tanh-approximated GELU.
inline DiffTensor gelu(const DiffTensor& a) {
  constexpr double kAlpha = 0.7978845608028654;  // sqrt(2/pi)
  constexpr double kBeta = 0.044715;
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = a[i];
    out[i] = 0.5 * x * (1.0 + std::tanh(kAlpha * (x + kBeta * x * x * x)));
  }
  return DiffTensor::make_result(
      a.shape(), std::move(out), "gelu", {a}, [](const detail::Node& self) {
        const auto& xs = parent_data(self, 0);
        double* ga = grad_sink(self, 0);
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
          const double x = xs[i];
          const double u = kAlpha * (x + kBeta * x * x * x);
          const double t = std::tanh(u);
          const double du = kAlpha * (1.0 + 3.0 * kBeta * x * x);
          ga[i] += self.grad[i] * (0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du);
        }
      });
}

// ---------------------------------------------------------------------------
// Reductions

inline DiffTensor sum(const DiffTensor& a) {
  double acc = 0.0;
  for (double v : a.data()) acc += v;
  return DiffTensor::make_result({}, {acc}, "sum", {a}, [](const detail::Node& self) {
    double* ga = grad_sink(self, 0);
    const std::size_t n = self.parents[0]->data.size();
    for (std::size_t i = 0; i < n; ++i) ga[i] += self.grad[0];
  });
}

inline DiffTensor mean(const DiffTensor& a) {
  if (a.numel() == 0) throw ShapeError("mean of empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.numel()));
}

/// Sum of same-shaped tensors (used to pool per-sample losses).
inline DiffTensor add_n(const std::vector<DiffTensor>& terms) {
  if (terms.empty()) throw ShapeError("add_n of no terms");
  DiffTensor acc = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) acc = add(acc, terms[i]);
  return acc;
}

// ---------------------------------------------------------------------------
// Normalisation and probabilities

inline DiffTensor softmax(const DiffTensor& x, std::size_t axis) {
  if (axis >= x.rank()) {
    throw ShapeError("softmax: axis " + std::to_string(axis) + " out of range for " +
                     shape_str(x.shape()));
  }
  detail::require_no_nan(x, "softmax");
  const auto& shape = x.shape();
  const std::size_t len = shape[axis];
  std::size_t inner = 1;
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  const std::size_t outer = x.numel() / std::max<std::size_t>(len * inner, 1);

  std::vector<double> out(x.numel());
  const auto src = x.data();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * len * inner + in;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < len; ++i) mx = std::max(mx, src[base + i * inner]);
      double z = 0.0;
      for (std::size_t i = 0; i < len; ++i) {
        const double e = std::exp(src[base + i * inner] - mx);
        out[base + i * inner] = e;
        z += e;
      }
      for (std::size_t i = 0; i < len; ++i) out[base + i * inner] /= z;
    }
  }
  return DiffTensor::make_result(
      shape, std::move(out), "softmax", {x}, [outer, len, inner](const detail::Node& self) {
        double* gx = grad_sink(self, 0);
        for (std::size_t o = 0; o < outer; ++o) {
          for (std::size_t in = 0; in < inner; ++in) {
            const std::size_t base = o * len * inner + in;
            double dot = 0.0;
            for (std::size_t i = 0; i < len; ++i)
              dot += self.grad[base + i * inner] * self.data[base + i * inner];
            for (std::size_t i = 0; i < len; ++i) {
              const std::size_t j = base + i * inner;
              gx[j] += self.data[j] * (self.grad[j] - dot);
            }
          }
        }
      });
}

/// Normalises over the last axis, then applies gain and bias (both sized to
/// that axis). Zero-variance rows normalise to zero because `eps` sits
/// inside the square root.
inline DiffTensor layer_norm(const DiffTensor& x, const DiffTensor& gain, const DiffTensor& bias,
                             double eps = 1e-5) {
  if (x.rank() == 0 || x.shape().back() == 0) throw ShapeError("layer_norm: empty last axis");
  const std::size_t width = x.shape().back();
  if (gain.shape() != Shape{width} || bias.shape() != Shape{width}) {
    throw ShapeError("layer_norm: gain/bias " + shape_str(gain.shape()) + "/" +
                     shape_str(bias.shape()) + " do not fit " + shape_str(x.shape()));
  }
  const std::size_t rows = x.numel() / width;
  auto xhat = std::make_shared<std::vector<double>>(x.numel());
  auto rstd = std::make_shared<std::vector<double>>(rows);
  std::vector<double> out(x.numel());
  const auto src = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = src.data() + r * width;
    double mu = 0.0;
    for (std::size_t i = 0; i < width; ++i) mu += row[i];
    mu /= static_cast<double>(width);
    double var = 0.0;
    for (std::size_t i = 0; i < width; ++i) var += (row[i] - mu) * (row[i] - mu);
    var /= static_cast<double>(width);
    const double rs = 1.0 / std::sqrt(var + eps);
    (*rstd)[r] = rs;
    for (std::size_t i = 0; i < width; ++i) {
      const double h = (row[i] - mu) * rs;
      (*xhat)[r * width + i] = h;
      out[r * width + i] = gain[i] * h + bias[i];
    }
  }
  return DiffTensor::make_result(
      x.shape(), std::move(out), "layer_norm", {x, gain, bias},
      [rows, width, xhat, rstd](const detail::Node& self) {
        const auto& gv = parent_data(self, 1);
        double* gx = grad_sink(self, 0);
        double* gg = grad_sink(self, 1);
        double* gb = grad_sink(self, 2);
        std::vector<double> dh(width);
        for (std::size_t r = 0; r < rows; ++r) {
          const double* g = self.grad.data() + r * width;
          const double* h = xhat->data() + r * width;
          double mean_dh = 0.0, mean_dh_h = 0.0;
          for (std::size_t i = 0; i < width; ++i) {
            dh[i] = g[i] * gv[i];
            mean_dh += dh[i];
            mean_dh_h += dh[i] * h[i];
            if (gg) gg[i] += g[i] * h[i];
            if (gb) gb[i] += g[i];
          }
          if (!gx) continue;
          mean_dh /= static_cast<double>(width);
          mean_dh_h /= static_cast<double>(width);
          for (std::size_t i = 0; i < width; ++i)
            gx[r * width + i] += (*rstd)[r] * (dh[i] - mean_dh - h[i] * mean_dh_h);
        }
      });
}

/// Natural-log floor used by cross_entropy.
inline constexpr double kProbabilityFloor = 1e-12;

/// -sum(y * log p) with log clamped at log(kProbabilityFloor). `target` is a
/// constant distribution (normally one-hot) of the same length as `p`.
inline DiffTensor cross_entropy(const DiffTensor& p, const DiffTensor& target) {
  if (p.numel() != target.numel()) {
    throw ShapeError("cross_entropy: dimension mismatch " + shape_str(p.shape()) + " vs " +
                     shape_str(target.shape()));
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < p.numel(); ++i) {
    if (target[i] != 0.0) loss -= target[i] * std::log(std::max(p[i], kProbabilityFloor));
  }
  return DiffTensor::make_result({}, {loss}, "cross_entropy", {p, target},
                                 [](const detail::Node& self) {
                                   const auto& pv = parent_data(self, 0);
                                   const auto& yv = parent_data(self, 1);
                                   if (double* gp = grad_sink(self, 0)) {
                                     for (std::size_t i = 0; i < pv.size(); ++i)
                                       if (yv[i] != 0.0 && pv[i] > kProbabilityFloor)
                                         gp[i] -= self.grad[0] * yv[i] / pv[i];
                                   }
                                 });
}

inline DiffTensor one_hot(std::size_t index, std::size_t classes) {
  if (index >= classes) {
    throw std::out_of_range("one_hot: index " + std::to_string(index) + " >= " +
                            std::to_string(classes));
  }
  std::vector<double> v(classes, 0.0);
  v[index] = 1.0;
  return DiffTensor::from({classes}, std::move(v));
}

// ---------------------------------------------------------------------------
// Reshaping and slicing

inline DiffTensor reshape(const DiffTensor& a, Shape shape) {
  if (numel(shape) != a.numel()) {
    throw ShapeError("reshape: " + shape_str(a.shape()) + " -> " + shape_str(shape));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  return DiffTensor::make_result(std::move(shape), std::move(out), "reshape", {a},
                                 [](const detail::Node& self) {
                                   double* ga = grad_sink(self, 0);
                                   for (std::size_t i = 0; i < self.grad.size(); ++i)
                                     ga[i] += self.grad[i];
                                 });
}

inline DiffTensor slice_rows(const DiffTensor& a, std::size_t begin, std::size_t end) {
  detail::require_rank(a, 2, "slice_rows");
  if (begin > end || end > a.dim(0)) {
    throw ShapeError("slice_rows: [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") out of " + shape_str(a.shape()));
  }
  const std::size_t c = a.dim(1);
  std::vector<double> out(a.data().begin() + begin * c, a.data().begin() + end * c);
  return DiffTensor::make_result({end - begin, c}, std::move(out), "slice_rows", {a},
                                 [begin, c](const detail::Node& self) {
                                   double* ga = grad_sink(self, 0) + begin * c;
                                   for (std::size_t i = 0; i < self.grad.size(); ++i)
                                     ga[i] += self.grad[i];
                                 });
}

inline DiffTensor slice_cols(const DiffTensor& a, std::size_t begin, std::size_t end) {
  detail::require_rank(a, 2, "slice_cols");
  if (begin > end || end > a.dim(1)) {
    throw ShapeError("slice_cols: [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") out of " + shape_str(a.shape()));
  }
  const std::size_t r = a.dim(0), c = a.dim(1), w = end - begin;
  std::vector<double> out(r * w);
  const auto src = a.data();
  for (std::size_t i = 0; i < r; ++i)
    std::copy(src.begin() + i * c + begin, src.begin() + i * c + end, out.begin() + i * w);
  return DiffTensor::make_result({r, w}, std::move(out), "slice_cols", {a},
                                 [r, c, w, begin](const detail::Node& self) {
                                   double* ga = grad_sink(self, 0);
                                   for (std::size_t i = 0; i < r; ++i)
                                     for (std::size_t j = 0; j < w; ++j)
                                       ga[i * c + begin + j] += self.grad[i * w + j];
                                 });
}

inline DiffTensor concat_rows(const std::vector<DiffTensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows of nothing");
  const std::size_t c = parts.front().dim(1);
  std::size_t rows = 0;
  for (const auto& p : parts) {
    detail::require_rank(p, 2, "concat_rows");
    if (p.dim(1) != c) {
      throw ShapeError("concat_rows: width mismatch " + shape_str(parts.front().shape()) +
                       " vs " + shape_str(p.shape()));
    }
    rows += p.dim(0);
  }
  std::vector<double> out;
  out.reserve(rows * c);
  for (const auto& p : parts) out.insert(out.end(), p.data().begin(), p.data().end());
  return DiffTensor::make_result({rows, c}, std::move(out), "concat_rows", parts,
                                 [](const detail::Node& self) {
                                   std::size_t offset = 0;
                                   for (std::size_t p = 0; p < self.parents.size(); ++p) {
                                     const std::size_t n = self.parents[p]->data.size();
                                     if (double* g = grad_sink(self, p)) {
                                       for (std::size_t i = 0; i < n; ++i)
                                         g[i] += self.grad[offset + i];
                                     }
                                     offset += n;
                                   }
                                 });
}

inline DiffTensor concat_cols(const std::vector<DiffTensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols of nothing");
  const std::size_t r = parts.front().dim(0);
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    detail::require_rank(p, 2, "concat_cols");
    if (p.dim(0) != r) {
      throw ShapeError("concat_cols: height mismatch " + shape_str(parts.front().shape()) +
                       " vs " + shape_str(p.shape()));
    }
    widths.push_back(p.dim(1));
    total += p.dim(1);
  }
  std::vector<double> out(r * total);
  std::size_t col = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto src = parts[p].data();
    for (std::size_t i = 0; i < r; ++i)
      std::copy(src.begin() + i * widths[p], src.begin() + (i + 1) * widths[p],
                out.begin() + i * total + col);
    col += widths[p];
  }
  return DiffTensor::make_result({r, total}, std::move(out), "concat_cols", parts,
                                 [r, total, widths](const detail::Node& self) {
                                   std::size_t col = 0;
                                   for (std::size_t p = 0; p < widths.size(); ++p) {
                                     if (double* g = grad_sink(self, p)) {
                                       for (std::size_t i = 0; i < r; ++i)
                                         for (std::size_t j = 0; j < widths[p]; ++j)
                                           g[i * widths[p] + j] +=
                                               self.grad[i * total + col + j];
                                     }
                                     col += widths[p];
                                   }
                                 });
}

/// x [n x in] * w [in x out] + b [out].
inline DiffTensor linear(const DiffTensor& x, const DiffTensor& w, const DiffTensor& b) {
  return add_bias(matmul(x, w), b);
}

// ---------------------------------------------------------------------------
// Spatial ops over [N, C, H, W]

/// Stride-1 2-D convolution with symmetric zero padding.
/// x: [N, C, H, W], weight: [O, C, KH, KW], bias: [O].
inline DiffTensor conv2d(const DiffTensor& x, const DiffTensor& weight, const DiffTensor& bias,
                         std::size_t pad) {
  detail::require_rank(x, 4, "conv2d");
  detail::require_rank(weight, 4, "conv2d");
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t o = weight.dim(0), kh = weight.dim(2), kw = weight.dim(3);
  if (weight.dim(1) != c || bias.shape() != Shape{o}) {
    throw ShapeError("conv2d: input " + shape_str(x.shape()) + ", weight " +
                     shape_str(weight.shape()) + ", bias " + shape_str(bias.shape()));
  }
  if (h + 2 * pad < kh || w + 2 * pad < kw) {
    throw ShapeError("conv2d: kernel larger than padded input " + shape_str(x.shape()));
  }
  const std::size_t ho = h + 2 * pad - kh + 1, wo = w + 2 * pad - kw + 1;
  const std::size_t patch = c * kh * kw, cols_w = n * ho * wo, plane = ho * wo;

  auto cols = std::make_shared<std::vector<double>>(patch * cols_w, 0.0);
  const auto src = x.data();
  for (std::size_t ci = 0; ci < c; ++ci) {
    for (std::size_t ki = 0; ki < kh; ++ki) {
      for (std::size_t kj = 0; kj < kw; ++kj) {
        double* dst = cols->data() + ((ci * kh + ki) * kw + kj) * cols_w;
        for (std::size_t ni = 0; ni < n; ++ni) {
          const double* img = src.data() + (ni * c + ci) * h * w;
          for (std::size_t oh = 0; oh < ho; ++oh) {
            const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh + ki) -
                                      static_cast<std::ptrdiff_t>(pad);
            if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(h)) continue;
            double* drow = dst + ni * plane + oh * wo;
            for (std::size_t ow = 0; ow < wo; ++ow) {
              const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow + kj) -
                                        static_cast<std::ptrdiff_t>(pad);
              if (iw >= 0 && iw < static_cast<std::ptrdiff_t>(w)) drow[ow] = img[ih * w + iw];
            }
          }
        }
      }
    }
  }

  std::vector<double> mat(o * cols_w);
  kernels::gemm(false, false, o, cols_w, patch, 1.0, weight.data().data(), cols->data(), 0.0,
                mat.data());
  std::vector<double> out(n * o * plane);
  for (std::size_t oi = 0; oi < o; ++oi)
    for (std::size_t ni = 0; ni < n; ++ni) {
      const double* s = mat.data() + oi * cols_w + ni * plane;
      double* d = out.data() + (ni * o + oi) * plane;
      for (std::size_t i = 0; i < plane; ++i) d[i] = s[i] + bias[oi];
    }

  const bool keep = grad_enabled() && (x.requires_grad() || weight.requires_grad() ||
                                       bias.requires_grad());
  if (!keep) cols.reset();
  return DiffTensor::make_result(
      {n, o, ho, wo}, std::move(out), "conv2d", {x, weight, bias},
      [=](const detail::Node& self) {
        std::vector<double> gmat(o * cols_w);
        for (std::size_t oi = 0; oi < o; ++oi)
          for (std::size_t ni = 0; ni < n; ++ni)
            std::copy_n(self.grad.data() + (ni * o + oi) * plane, plane,
                        gmat.data() + oi * cols_w + ni * plane);
        if (double* gw = grad_sink(self, 1)) {
          kernels::gemm(false, true, o, patch, cols_w, 1.0, gmat.data(), cols->data(), 1.0, gw);
        }
        if (double* gb = grad_sink(self, 2)) {
          for (std::size_t oi = 0; oi < o; ++oi) {
            double acc = 0.0;
            const double* g = gmat.data() + oi * cols_w;
            for (std::size_t i = 0; i < cols_w; ++i) acc += g[i];
            gb[oi] += acc;
          }
        }
        if (double* gx = grad_sink(self, 0)) {
          std::vector<double> gcols(patch * cols_w);
          kernels::gemm(true, false, patch, cols_w, o, 1.0, parent_data(self, 1).data(),
                        gmat.data(), 0.0, gcols.data());
          for (std::size_t ci = 0; ci < c; ++ci)
            for (std::size_t ki = 0; ki < kh; ++ki)
              for (std::size_t kj = 0; kj < kw; ++kj) {
                const double* s = gcols.data() + ((ci * kh + ki) * kw + kj) * cols_w;
                for (std::size_t ni = 0; ni < n; ++ni) {
                  double* img = gx + (ni * c + ci) * h * w;
                  for (std::size_t oh = 0; oh < ho; ++oh) {
                    const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh + ki) -
                                              static_cast<std::ptrdiff_t>(pad);
                    if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(h)) continue;
                    const double* srow = s + ni * plane + oh * wo;
                    for (std::size_t ow = 0; ow < wo; ++ow) {
                      const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow + kj) -
                                                static_cast<std::ptrdiff_t>(pad);
                      if (iw >= 0 && iw < static_cast<std::ptrdiff_t>(w))
                        img[ih * w + iw] += srow[ow];
                    }
                  }
                }
              }
        }
      });
}

/// 2x2 mean pooling with stride 2; odd trailing rows/columns are dropped.
inline DiffTensor avg_pool2(const DiffTensor& x) {
  detail::require_rank(x, 4, "avg_pool2");
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t ho = h / 2, wo = w / 2;
  if (ho == 0 || wo == 0) throw ShapeError("avg_pool2: input too small " + shape_str(x.shape()));
  std::vector<double> out(n * c * ho * wo);
  const auto src = x.data();
  for (std::size_t p = 0; p < n * c; ++p) {
    const double* img = src.data() + p * h * w;
    double* dst = out.data() + p * ho * wo;
    for (std::size_t i = 0; i < ho; ++i)
      for (std::size_t j = 0; j < wo; ++j) {
        const double* q = img + 2 * i * w + 2 * j;
        dst[i * wo + j] = 0.25 * (q[0] + q[1] + q[w] + q[w + 1]);
      }
  }
  return DiffTensor::make_result({n, c, ho, wo}, std::move(out), "avg_pool2", {x},
                                 [n, c, h, w, ho, wo](const detail::Node& self) {
                                   double* gx = grad_sink(self, 0);
                                   for (std::size_t p = 0; p < n * c; ++p) {
                                     double* img = gx + p * h * w;
                                     const double* g = self.grad.data() + p * ho * wo;
                                     for (std::size_t i = 0; i < ho; ++i)
                                       for (std::size_t j = 0; j < wo; ++j) {
                                         const double v = 0.25 * g[i * wo + j];
                                         double* q = img + 2 * i * w + 2 * j;
                                         q[0] += v;
                                         q[1] += v;
                                         q[w] += v;
                                         q[w + 1] += v;
                                       }
                                   }
                                 });
}

/// [N, C, H, W] -> [N, C] by averaging each plane.
inline DiffTensor global_mean_pool(const DiffTensor& x) {
  detail::require_rank(x, 4, "global_mean_pool");
  const std::size_t n = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3);
  if (plane == 0) throw ShapeError("global_mean_pool: empty plane");
  std::vector<double> out(n * c);
  const auto src = x.data();
  for (std::size_t p = 0; p < n * c; ++p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < plane; ++i) acc += src[p * plane + i];
    out[p] = acc / static_cast<double>(plane);
  }
  return DiffTensor::make_result({n, c}, std::move(out), "global_mean_pool", {x},
                                 [n, c, plane](const detail::Node& self) {
                                   double* gx = grad_sink(self, 0);
                                   const double inv = 1.0 / static_cast<double>(plane);
                                   for (std::size_t p = 0; p < n * c; ++p)
                                     for (std::size_t i = 0; i < plane; ++i)
                                       gx[p * plane + i] += self.grad[p] * inv;
                                 });
}

}  // namespace jerseyid::numkit
