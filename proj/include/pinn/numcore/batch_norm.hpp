#pragma once

#include "pinn/numcore/binder.hpp"
#include "pinn/numcore/ops.hpp"

namespace pinn::numcore {

struct BatchNormState {
  Tensor running_mean;
  Tensor running_var;
  Tensor scale;
  Tensor shift;
  double momentum = 0.1;
  double epsilon = 1e-5;

  static BatchNormState make(std::size_t features) {
    return {Tensor::zeros({features}), Tensor::filled({features}, 1.0), Tensor::filled({features}, 1.0),
            Tensor::zeros({features})};
  }
  std::size_t features() const { return scale.size(); }
};

/// Per-feature standardization of x [batch, features] followed by scale/shift. Training mode
/// uses batch statistics (biased variance) and folds them into the running estimates; inference
/// uses the running estimates.
inline Var batch_norm(Binder& bind, Var x, BatchNormState& st, bool training) {
  const Shape& shape = x.shape();
  if (shape.size() != 2 || shape[1] != st.features())
    throw ShapeError("batch_norm: input " + shape_str(shape) + " vs " + std::to_string(st.features()) + " features");
  const std::size_t n = shape[0];
  Tape& tape = bind.tape();
  Var normalized;
  if (training) {
    if (n < 2) throw ContractError("batch_norm: training mode needs a batch of at least 2");
    Var mu = scale(sum_axis(x, 0), 1.0 / static_cast<double>(n));
    Var centered = sub(x, broadcast_axis(mu, 0, n));
    Var var = scale(sum_axis(square(centered), 0), 1.0 / static_cast<double>(n));
    normalized = div(centered, broadcast_axis(sqrt(add_scalar(var, st.epsilon)), 0, n));
    const double unbias = static_cast<double>(n) / static_cast<double>(n - 1);
    for (std::size_t f = 0; f < st.features(); ++f) {
      st.running_mean[f] = (1.0 - st.momentum) * st.running_mean[f] + st.momentum * mu.value()[f];
      st.running_var[f] = (1.0 - st.momentum) * st.running_var[f] + st.momentum * var.value()[f] * unbias;
    }
  } else {
    Tensor mu = st.running_mean.reshaped({1, st.features()});
    Tensor denom(Shape{1, st.features()});
    for (std::size_t f = 0; f < st.features(); ++f) denom[f] = std::sqrt(st.running_var[f] + st.epsilon);
    Var centered = sub(x, broadcast_axis(tape.constant(std::move(mu)), 0, n));
    normalized = div(centered, broadcast_axis(tape.constant(std::move(denom)), 0, n));
  }
  Var gamma = broadcast_axis(reshape(bind(st.scale), {1, st.features()}), 0, n);
  return add_bias(mul(normalized, gamma), bind(st.shift));
}

}  // namespace pinn::numcore
