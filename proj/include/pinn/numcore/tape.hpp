#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <utility>
#include <vector>

#include "pinn/numcore/kernels.hpp"
#include "pinn/numcore/tensor.hpp"

namespace pinn::numcore {

class Tape;

/// True when `a` is allocated with the same shape as `ref` (a default-constructed tensor is not).
inline bool same_layout(const Tensor& a, const Tensor& ref) {
  return a.size() == ref.size() && a.shape() == ref.shape();
}

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t size() const { return value().size(); }
};

/// Gradient storage indexed by node id. Entries for nodes the reverse sweep never reached
/// are materialized as zeros on access.
class Gradients {
 public:
  Gradients(const Tape* tape, std::vector<Tensor> grads) : tape_(tape), grads_(std::move(grads)) {}

  const Tensor& at(std::size_t id) const;
  const Tensor& at(Var v) const { return at(v.id); }
  const Tensor& operator[](Var v) const { return at(v.id); }

 private:
  const Tape* tape_;
  mutable std::vector<Tensor> grads_;
};

/// Records primitive operations in creation order; since every op's inputs already exist
/// when it is recorded, node ids form a topological order and the reverse sweep is a
/// simple descending loop. Single-owner: do not share across threads.
class Tape {
 public:
  /// Adds `grad_out` contributions into `grads[input]` for each input of the node.
  using BackwardFn = std::function<void(const Tensor& grad_out, std::vector<Tensor>& grads)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Tensor value) { return push(std::move(value), {}, nullptr, true); }
  Var constant(Tensor value) { return push(std::move(value), {}, nullptr, false); }

  Var record(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward) {
    bool needs = false;
    for (auto in : inputs) needs = needs || nodes_.at(in).requires_grad;
    return push(std::move(value), std::move(inputs), needs ? std::move(backward) : BackwardFn{}, needs);
  }

  const Tensor& value(std::size_t id) const { return nodes_.at(id).value; }
  bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Reverse sweep from a scalar output.
  Gradients backward(Var output) const {
    if (output.tape != this) throw ContractError("backward: output belongs to a different tape");
    const Tensor& out = value(output.id);
    if (out.size() != 1) throw ContractError("backward: output must be scalar, got shape " + shape_str(out.shape()));
    std::vector<Tensor> grads(nodes_.size());
    grads[output.id] = Tensor::filled(out.shape(), 1.0);
    for (std::size_t i = output.id + 1; i-- > 0;) {
      const Node& node = nodes_[i];
      if (!node.backward || !same_layout(grads[i], node.value)) continue;
      node.backward(grads[i], grads);
    }
    return Gradients(this, std::move(grads));
  }

 private:
  struct Node {
    Tensor value;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    bool requires_grad = false;
  };

  Var push(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward, bool requires_grad) {
    nodes_.push_back(Node{std::move(value), std::move(inputs), std::move(backward), requires_grad});
    return Var{this, nodes_.size() - 1};
  }

  std::deque<Node> nodes_;  // stable references to node values while the tape grows
};

inline const Tensor& Var::value() const { return tape->value(id); }

inline const Tensor& Gradients::at(std::size_t id) const {
  Tensor& g = grads_.at(id);
  const Tensor& v = tape_->value(id);
  if (!same_layout(g, v)) g = Tensor::zeros(v.shape());
  return g;
}

/// Adds `g` into the gradient slot of node `id`, allocating it on first use.
inline void accumulate(std::vector<Tensor>& grads, std::size_t id, Tensor g) {
  Tensor& slot = grads[id];
  if (!same_layout(slot, g)) {
    if (slot.size() != 0) throw ShapeError("accumulate: gradient shape drift on node " + std::to_string(id));
    slot = std::move(g);
    return;
  }
  kernels::add_into(slot, g);
}

}  // namespace pinn::numcore
