#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "pinn/numcore/tensor.hpp"

namespace pinn::numcore {

struct AdamState {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
};

struct RmspropState {
  double learning_rate = 0.01;
  double decay = 0.9;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::vector<Tensor> mean_square;
};

namespace detail {

inline void check_grads(std::span<Tensor* const> params, std::span<const Tensor> grads, const char* who) {
  if (params.size() != grads.size()) throw ShapeError(std::string(who) + ": parameter/gradient count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i)
    if (params[i]->shape() != grads[i].shape())
      throw ShapeError(std::string(who) + ": gradient " + std::to_string(i) + " has shape " + shape_str(grads[i].shape()) +
                       ", parameter has " + shape_str(params[i]->shape()));
}

inline void ensure_slots(std::vector<Tensor>& slots, std::span<Tensor* const> params, const char* who) {
  if (slots.empty()) {
    for (const Tensor* p : params) slots.push_back(Tensor::zeros(p->shape()));
    return;
  }
  if (slots.size() != params.size()) throw ShapeError(std::string(who) + ": optimizer state bound to a different parameter set");
  for (std::size_t i = 0; i < params.size(); ++i)
    if (slots[i].shape() != params[i]->shape()) throw ShapeError(std::string(who) + ": accumulator shape mismatch");
}

}  // namespace detail

/// One bias-corrected Adam update (descent direction).
inline void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& st) {
  detail::check_grads(params, grads, "adam_step");
  detail::ensure_slots(st.first_moment, params, "adam_step");
  detail::ensure_slots(st.second_moment, params, "adam_step");
  ++st.step;
  const double c1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& w = *params[p];
    Tensor& m = st.first_moment[p];
    Tensor& v = st.second_moment[p];
    const Tensor& g = grads[p];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = st.beta1 * m[i] + (1.0 - st.beta1) * g[i];
      v[i] = st.beta2 * v[i] + (1.0 - st.beta2) * g[i] * g[i];
      w[i] -= st.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + st.epsilon);
    }
  }
}

inline void rmsprop_step(std::span<Tensor* const> params, std::span<const Tensor> grads, RmspropState& st) {
  detail::check_grads(params, grads, "rmsprop_step");
  detail::ensure_slots(st.mean_square, params, "rmsprop_step");
  ++st.step;
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& w = *params[p];
    Tensor& s = st.mean_square[p];
    const Tensor& g = grads[p];
    for (std::size_t i = 0; i < w.size(); ++i) {
      s[i] = st.decay * s[i] + (1.0 - st.decay) * g[i] * g[i];
      w[i] -= st.learning_rate * g[i] / (std::sqrt(s[i]) + st.epsilon);
    }
  }
}

}  // namespace pinn::numcore
