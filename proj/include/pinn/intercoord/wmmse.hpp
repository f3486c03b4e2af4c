#pragma once

#include <algorithm>
#include <limits>

#include "pinn/intercoord/channel.hpp"

namespace pinn::intercoord {

struct WmmseConfig {
  std::size_t max_iterations = 500;
  double tolerance = 1e-6;  // on the change of the weighted-MSE objective
  double noise_power = 1.0;
  double p_max = 1.0;
  bool log2 = false;  // rate base used by sum-rate reports

  void validate() const {
    if (!(tolerance > 0.0)) throw ValidationError("tolerance", "must be positive");
    if (!(noise_power > 0.0)) throw ValidationError("noise_power", "must be positive");
    if (!(p_max > 0.0)) throw ValidationError("p_max", "must be positive");
    if (max_iterations == 0) throw ValidationError("max_iterations", "must be positive");
  }
};

struct WmmseResult {
  Tensor y;                        // normalized powers p / P_max
  std::size_t iterations = 0;
  std::vector<double> rate_trace;  // sum-rate at the initial point and after every iteration
  std::vector<double> surrogate_trace;  // weighted MSE sum_k (w_k e_k - log w_k) at the same points
};

/// Weighted-MMSE block-coordinate ascent on the SISO interference channel, from full power.
inline WmmseResult wmmse_solve(const Tensor& x, const WmmseConfig& cfg = {}) {
  check_channel(x);
  cfg.validate();
  const std::size_t k = x.dim(0);
  const double vmax = std::sqrt(cfg.p_max), s2 = cfg.noise_power;
  // h(r, t): gain from transmitter t to receiver r.
  auto h = [&](std::size_t r, std::size_t t) { return x(t, r); };
  std::vector<double> v(k, vmax), u(k), w(k);
  auto update_uw = [&] {
    // With u and w at their optima, w_k e_k = 1 and the objective is K - sum_k log w_k.
    double logw = 0.0;
    for (std::size_t r = 0; r < k; ++r) {
      double rx = s2;
      for (std::size_t t = 0; t < k; ++t) rx += h(r, t) * h(r, t) * v[t] * v[t];
      u[r] = h(r, r) * v[r] / rx;
      w[r] = 1.0 / (1.0 - u[r] * h(r, r) * v[r]);
      logw += std::log(w[r]);
    }
    return static_cast<double>(k) - logw;
  };
  auto powers = [&] {
    Tensor y({k});
    for (std::size_t i = 0; i < k; ++i) y[i] = v[i] * v[i] / cfg.p_max;
    return y;
  };

  WmmseResult res;
  double surrogate = update_uw();
  res.surrogate_trace.push_back(surrogate);
  res.rate_trace.push_back(sum_rate(x, powers(), cfg.p_max, s2));
  for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
    for (std::size_t t = 0; t < k; ++t) {
      double denom = 0.0;
      for (std::size_t r = 0; r < k; ++r) denom += w[r] * u[r] * u[r] * h(r, t) * h(r, t);
      const double num = w[t] * u[t] * h(t, t);
      v[t] = denom > 0.0 ? std::clamp(num / denom, 0.0, vmax) : vmax;
    }
    const double next = update_uw();
    res.iterations = it + 1;
    res.surrogate_trace.push_back(next);
    res.rate_trace.push_back(sum_rate(x, powers(), cfg.p_max, s2));
    const bool done = std::abs(next - surrogate) < cfg.tolerance;
    surrogate = next;
    if (done) break;
  }
  res.y = powers();
  return res;
}

/// Exhaustive search over {0, 1/(m-1), ..., 1}^K; ties go to the lower total power.
inline Tensor grid_oracle(const Tensor& x, const WmmseConfig& cfg, std::size_t points_per_dim) {
  check_channel(x);
  const std::size_t k = x.dim(0);
  if (k > 3) throw ContractError("grid_oracle: K must be at most 3");
  if (points_per_dim < 2) throw ContractError("grid_oracle: need at least 2 points per dimension");
  std::vector<std::size_t> idx(k, 0);
  Tensor y({k}), best({k});
  double best_rate = -std::numeric_limits<double>::infinity(), best_power = 0.0;
  const double step = 1.0 / static_cast<double>(points_per_dim - 1);
  for (;;) {
    double power = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      y[i] = static_cast<double>(idx[i]) * step;
      power += y[i];
    }
    const double rate = sum_rate(x, y, cfg.p_max, cfg.noise_power);
    if (rate > best_rate || (rate == best_rate && power < best_power)) {
      best_rate = rate;
      best_power = power;
      best = y;
    }
    std::size_t d = 0;
    while (d < k && ++idx[d] == points_per_dim) idx[d++] = 0;
    if (d == k) break;
  }
  return best;
}

}  // namespace pinn::intercoord
