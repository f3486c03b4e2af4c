#pragma once

#include <unordered_map>
#include <vector>

#include "pinn/numcore/tape.hpp"

namespace pinn::numcore {

/// Maps parameter tensors onto tape nodes, once per tensor. In trainable mode the nodes are
/// leaves that receive gradients; otherwise they are constants (pure evaluation).
class Binder {
 public:
  explicit Binder(Tape& tape, bool trainable = true) : tape_(&tape), trainable_(trainable) {}

  Var operator()(const Tensor& param) {
    auto it = bound_.find(&param);
    if (it != bound_.end()) return it->second;
    Var v = trainable_ ? tape_->leaf(param) : tape_->constant(param);
    bound_.emplace(&param, v);
    return v;
  }

  Tape& tape() noexcept { return *tape_; }
  bool trainable() const noexcept { return trainable_; }

 private:
  Tape* tape_;
  bool trainable_;
  std::unordered_map<const Tensor*, Var> bound_;
};

}  // namespace pinn::numcore
