#pragma once

// Dense row-major tensor with a reverse-mode differentiation tape.
//
// Every DiffTensor is a handle onto a shared graph node. Operations create
// new nodes that remember their parents and a closure that propagates the
// node's gradient back into them. Calling backward() on a scalar walks the
// graph once in reverse topological order.

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace jerseyid::numkit {

using Shape = std::vector<std::size_t>;

inline std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         [](std::size_t a, std::size_t b) { return a * b; });
}

inline std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until something accumulates into it
  bool requires_grad = false;
  std::string op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(const Node&)> backward;

  void ensure_grad() {
    if (grad.empty()) grad.assign(data.size(), 0.0);
  }
};

inline thread_local int no_grad_depth = 0;

}  // namespace detail

/// While alive, operations on this thread record no graph.
class NoGradGuard {
 public:
  NoGradGuard() { ++detail::no_grad_depth; }
  ~NoGradGuard() { --detail::no_grad_depth; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;
};

inline bool grad_enabled() { return detail::no_grad_depth == 0; }

class DiffTensor {
 public:
  DiffTensor() = default;

  static DiffTensor from(Shape shape, std::vector<double> data, bool requires_grad = false) {
    if (data.size() != numkit::numel(shape)) {
      throw ShapeError("tensor data length " + std::to_string(data.size()) +
                       " does not match shape " + shape_str(shape));
    }
    auto node = std::make_shared<detail::Node>();
    node->shape = std::move(shape);
    node->data = std::move(data);
    node->requires_grad = requires_grad;
    return DiffTensor(std::move(node));
  }

  static DiffTensor zeros(Shape shape, bool requires_grad = false) {
    const std::size_t n = numkit::numel(shape);
    return from(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
  }

  static DiffTensor full(Shape shape, double value, bool requires_grad = false) {
    const std::size_t n = numkit::numel(shape);
    return from(std::move(shape), std::vector<double>(n, value), requires_grad);
  }

  static DiffTensor scalar(double value, bool requires_grad = false) {
    return from({}, {value}, requires_grad);
  }

  /// Builds an op result. Parents and the backward closure are kept only
  /// when gradient recording is enabled and some parent requires a gradient.
  static DiffTensor make_result(Shape shape, std::vector<double> data, std::string op,
                                std::vector<DiffTensor> parents,
                                std::function<void(const detail::Node&)> backward) {
    DiffTensor out = from(std::move(shape), std::move(data));
    out.node_->op = std::move(op);
    bool needs = false;
    for (const auto& p : parents) needs = needs || p.requires_grad();
    if (needs && grad_enabled()) {
      out.node_->requires_grad = true;
      out.node_->parents.reserve(parents.size());
      for (auto& p : parents) out.node_->parents.push_back(p.node_);
      out.node_->backward = std::move(backward);
    }
    return out;
  }

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t axis) const { return node_->shape.at(axis); }
  std::size_t numel() const { return node_->data.size(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  const std::string& op() const { return node_->op; }

  std::span<const double> data() const { return node_->data; }
  /// Direct write access, meant for optimizers and checkpoint loading.
  std::span<double> mutable_data() { return node_->data; }

  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const double> grad() const { return node_->grad; }
  std::span<double> mutable_grad() {
    node_->ensure_grad();
    return node_->grad;
  }
  void zero_grad() {
    if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
  }

  double item() const {
    if (numel() != 1) throw ShapeError("item() on tensor of shape " + shape_str(shape()));
    return node_->data[0];
  }
  double operator[](std::size_t i) const { return node_->data[i]; }
  double at(std::size_t r, std::size_t c) const {
    return node_->data[r * node_->shape.back() + c];
  }

  /// Leaf copy sharing no graph history.
  DiffTensor detach() const { return from(shape(), node_->data, false); }

  /// Reverse-mode sweep from a scalar root. Gradients accumulate into every
  /// reachable node that requires one.
  void backward() const {
    if (numel() != 1) {
      throw ShapeError("backward() needs a scalar root, got " + shape_str(shape()));
    }
    if (!node_->requires_grad) return;

    std::vector<detail::Node*> order;
    std::unordered_set<detail::Node*> seen;
    std::vector<std::pair<detail::Node*, std::size_t>> stack;
    stack.emplace_back(node_.get(), 0);
    seen.insert(node_.get());
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < node->parents.size()) {
        detail::Node* parent = node->parents[next++].get();
        if (parent->requires_grad && seen.insert(parent).second) stack.emplace_back(parent, 0);
      } else {
        order.push_back(node);
        stack.pop_back();
      }
    }

    node_->ensure_grad();
    node_->grad[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      detail::Node* node = *it;
      if (!node->backward || node->grad.empty()) continue;
      node->backward(*node);
    }
  }

  detail::Node* node() const { return node_.get(); }

 private:
  explicit DiffTensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;
};

/// Accumulation target for a parent inside a backward closure, or nullptr
/// when the parent does not need a gradient.
inline double* grad_sink(const detail::Node& self, std::size_t parent) {
  detail::Node& p = *self.parents[parent];
  if (!p.requires_grad) return nullptr;
  p.ensure_grad();
  return p.grad.data();
}

inline const std::vector<double>& parent_data(const detail::Node& self, std::size_t parent) {
  return self.parents[parent]->data;
}

}  // namespace jerseyid::numkit
