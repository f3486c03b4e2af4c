#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "pinn/numcore/tensor.hpp"

namespace pinn::numcore {

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every coordinate.
inline Tensor finite_diff_grad(const std::function<double(const Tensor&)>& f, const Tensor& x, double h) {
  if (!(h > 0.0)) throw ContractError("finite_diff_grad: step must be positive");
  Tensor grad(x.shape());
  Tensor probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double up = f(probe);
    probe[i] = orig - h;
    const double down = f(probe);
    probe[i] = orig;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

/// ||a - b|| / max(||a|| + ||b||, floor). Zero when both vanish.
inline double relative_error(const Tensor& a, const Tensor& b, double floor = 1e-12) {
  if (a.size() != b.size()) throw ShapeError("relative_error: size mismatch");
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::sqrt(na) + std::sqrt(nb);
  if (denom == 0.0) return 0.0;
  return std::sqrt(diff) / std::max(denom, floor);
}

}  // namespace pinn::numcore
