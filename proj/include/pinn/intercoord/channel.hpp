#pragma once

#include <cmath>
#include <random>

#include "pinn/numcore/tensor.hpp"
#include "pinn/rng.hpp"

namespace pinn::intercoord {

using numcore::Tensor;

/// K x K Rayleigh magnitudes |gamma_mn| with unit mean square; row m = transmitter, column n = receiver.
inline Tensor generate_channels(std::size_t k, Rng& rng) {
  if (k == 0) throw ContractError("generate_channels: K must be at least 1");
  std::normal_distribution<double> n(0.0, 1.0);
  Tensor x({k, k});
  for (double& v : x.values()) {
    const double re = n(rng), im = n(rng);
    v = std::sqrt((re * re + im * im) / 2.0);
  }
  return x;
}

inline void check_channel(const Tensor& x) {
  if (x.rank() != 2 || x.dim(0) != x.dim(1) || x.dim(0) == 0) throw ShapeError("channel matrix must be K x K with K >= 1");
  for (double v : x.values())
    if (!(v >= 0.0) || !std::isfinite(v)) throw ContractError("channel entries must be finite and non-negative");
}

/// sum_k log(1 + X_kk^2 p_k / (sum_{n != k} X_nk^2 p_n + sigma^2)), p = y P_max.
inline double sum_rate(const Tensor& x, const Tensor& y, double p_max, double noise_power, bool log2 = false) {
  const std::size_t k = x.rank() == 2 ? x.dim(0) : 0;
  if (x.rank() != 2 || x.dim(1) != k || y.size() != k) throw ShapeError("sum_rate: X is not K x K or y is not length K");
  double total = 0.0;
  for (std::size_t r = 0; r < k; ++r) {
    double interference = noise_power;
    for (std::size_t t = 0; t < k; ++t)
      if (t != r) interference += x(t, r) * x(t, r) * y[t] * p_max;
    total += std::log1p(x(r, r) * x(r, r) * y[r] * p_max / interference);
  }
  return log2 ? total / std::log(2.0) : total;
}

}  // namespace pinn::intercoord
