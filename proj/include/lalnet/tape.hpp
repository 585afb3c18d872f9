#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

#include "lalnet/tensor.hpp"

namespace lalnet {

using NodeId = int64_t;

template <class T>
class Tape;

// Handle to a value recorded on a tape. Cheap to copy.
template <class T>
class Var {
 public:
  Var() = default;
  Var(Tape<T>* tape, NodeId id) : tape_(tape), id_(id) {}

  Tape<T>& tape() const { return *tape_; }
  NodeId id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Tensor<T>& value() const { return tape_->value(id_); }
  const Shape& shape() const { return value().shape(); }
  int64_t dim(int axis) const { return value().dim(axis); }
  bool requires_grad() const { return tape_->requires_grad(id_); }
  /// Accumulated gradient after backward(); zeros if none reached this node.
  Tensor<T> grad() const { return tape_->grad(id_); }

 private:
  Tape<T>* tape_ = nullptr;
  NodeId id_ = -1;
};

/// When set, every recorded value is checked for NaN/Inf and NonFiniteError names the op.
void set_finite_checks(bool enabled);
bool finite_checks_enabled();

// Wengert list: nodes are appended in evaluation order, so inputs always precede
// their consumers and the reverse pass is a single backwards sweep.
template <class T>
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, NodeId)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> constant(Tensor<T> value) { return push("constant", std::move(value), false, {}, nullptr); }
  Var<T> parameter(Tensor<T> value) { return push("parameter", std::move(value), true, {}, nullptr); }

  // Records an op output. The backward closure is dropped when no input needs a gradient.
  Var<T> record(const char* op, Tensor<T> value, std::initializer_list<Var<T>> inputs, BackwardFn fn) {
    return record(op, std::move(value), std::vector<Var<T>>(inputs), std::move(fn));
  }
  Var<T> record(const char* op, Tensor<T> value, const std::vector<Var<T>>& inputs, BackwardFn fn) {
    bool needs = false;
    std::vector<NodeId> ids;
    ids.reserve(inputs.size());
    for (const auto& v : inputs) {
      if (&v.tape() != this) throw std::invalid_argument(std::string(op) + ": inputs recorded on another tape");
      needs = needs || nodes_[static_cast<size_t>(v.id())].requires_grad;
      ids.push_back(v.id());
    }
    return push(op, std::move(value), needs, std::move(ids), needs ? std::move(fn) : nullptr);
  }

  const Tensor<T>& value(NodeId id) const { return nodes_[static_cast<size_t>(id)].value; }
  bool requires_grad(NodeId id) const { return nodes_[static_cast<size_t>(id)].requires_grad; }
  const std::string& op_name(NodeId id) const { return nodes_[static_cast<size_t>(id)].op; }
  size_t size() const { return nodes_.size(); }

  Tensor<T> grad(NodeId id) const {
    const auto& n = nodes_[static_cast<size_t>(id)];
    if (n.grad.empty() && n.value.size() != 0) return Tensor<T>(n.value.shape());
    return n.grad;
  }

  // Gradient buffer for accumulation inside backward closures; allocated on first use.
  Tensor<T>& grad_buffer(NodeId id) {
    auto& n = nodes_[static_cast<size_t>(id)];
    if (n.grad.shape() != n.value.shape() || n.grad.size() != n.value.size()) n.grad = Tensor<T>(n.value.shape());
    return n.grad;
  }
  bool has_grad(NodeId id) const {
    const auto& n = nodes_[static_cast<size_t>(id)];
    return n.grad.size() == n.value.size() && n.grad.shape() == n.value.shape();
  }

  void accumulate(NodeId id, const Tensor<T>& g) {
    if (!requires_grad(id)) return;
    auto& buf = grad_buffer(id);
    if (g.shape() != buf.shape()) {
      throw ShapeError("gradient shape " + shape_str(g.shape()) + " does not match value shape " +
                       shape_str(buf.shape()) + " at op " + op_name(id));
    }
    auto d = buf.data();
    auto s = g.data();
    for (size_t i = 0; i < d.size(); ++i) d[i] += s[i];
  }

  void zero_grad() {
    for (auto& n : nodes_) n.grad = Tensor<T>();
  }

  /// Reverse pass from a scalar loss, seeded with 1.
  void backward(const Var<T>& loss) {
    if (loss.value().size() != 1) {
      throw ShapeError("backward requires a scalar loss, got shape " + shape_str(loss.shape()));
    }
    backward(loss, Tensor<T>(loss.shape(), T(1)));
  }

  /// Reverse pass from an arbitrary output with an explicit seed (vector-Jacobian product).
  void backward(const Var<T>& out, const Tensor<T>& seed) {
    if (seed.shape() != out.shape()) {
      throw ShapeError("backward seed shape " + shape_str(seed.shape()) + " vs output " + shape_str(out.shape()));
    }
    if (!requires_grad(out.id())) return;
    accumulate(out.id(), seed);
    for (NodeId id = out.id(); id >= 0; --id) {
      auto& n = nodes_[static_cast<size_t>(id)];
      if (!n.backward || !has_grad(id)) continue;
      n.backward(*this, id);
    }
  }

  const std::vector<NodeId>& inputs(NodeId id) const { return nodes_[static_cast<size_t>(id)].inputs; }

 private:
  struct Node {
    std::string op;
    Tensor<T> value;
    Tensor<T> grad;
    bool requires_grad = false;
    std::vector<NodeId> inputs;
    BackwardFn backward;
  };

  Var<T> push(const char* op, Tensor<T> value, bool requires_grad, std::vector<NodeId> inputs, BackwardFn fn) {
    if (finite_checks_enabled() && !value.all_finite()) {
      throw NonFiniteError(std::string("non-finite value produced by op '") + op + "'");
    }
    nodes_.push_back(Node{op, std::move(value), Tensor<T>(), requires_grad, std::move(inputs), std::move(fn)});
    return Var<T>(this, static_cast<NodeId>(nodes_.size() - 1));
  }

  // deque keeps references to earlier values stable while new nodes are appended
  std::deque<Node> nodes_;
};

}  // namespace lalnet
