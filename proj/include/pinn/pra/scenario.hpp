#pragma once

#include <algorithm>
#include <random>

#include "pinn/numcore/tensor.hpp"
#include "pinn/pra/config.hpp"
#include "pinn/rng.hpp"

namespace pinn::pra {

using numcore::Tensor;

struct PraScenario {
  std::size_t k = 0;
  Tensor gain;       // [T_f, K] large-scale gain alpha_k^j
  Tensor bandwidth;  // [N_b, T_f] residual bandwidth W^j of each BS, Hz
  Tensor assoc;      // [N_b, T_f, K] 0/1 serving-BS indicator
  Tensor position;   // [T_f, K] position along the road, m

  std::size_t t_f() const { return gain.dim(0); }
  std::size_t n_b() const { return bandwidth.dim(0); }

  std::size_t serving_bs(std::size_t frame, std::size_t user) const {
    for (std::size_t i = 0; i < n_b(); ++i)
      if (assoc[(i * t_f() + frame) * k + user] != 0.0) return i;
    throw ContractError("scenario: user without serving BS");
  }
};

/// What the learner and the LP see: normalized rates and associations.
struct PraInstance {
  std::size_t k = 0;
  std::size_t t_f = 0;
  std::size_t n_b = 0;
  Tensor r;  // [T_f, K]
  Tensor m;  // [N_b, T_f, K]
};

/// BSs sit on a line at x = (2i + 1) R_b; users move along roads parallel to it.
inline PraScenario generate_pra_scenario(const PraConfig& cfg, std::size_t k, Rng& rng) {
  cfg.validate();
  if (k == 0 || k > cfg.k_max) throw ContractError("scenario: K must be in [1, K_max]");
  const std::size_t t_f = cfg.t_f, n_b = cfg.n_b;
  const double road_length = 2.0 * cfg.cell_radius * static_cast<double>(n_b);
  std::uniform_real_distribution<double> start(0.0, road_length);
  std::uniform_real_distribution<double> speed(cfg.speed_min, cfg.speed_max);
  std::uniform_int_distribution<std::size_t> road(0, cfg.road_offsets.size() - 1);
  std::bernoulli_distribution backwards(0.5);

  PraScenario s{k, Tensor({t_f, k}), Tensor({n_b, t_f}), Tensor({n_b, t_f, k}), Tensor({t_f, k})};
  for (std::size_t u = 0; u < k; ++u) {
    const double x0 = start(rng);
    const double v = speed(rng) * (backwards(rng) ? -1.0 : 1.0);
    const double offset = cfg.road_offsets[road(rng)];
    for (std::size_t j = 0; j < t_f; ++j) {
      const double x = std::clamp(x0 + v * (static_cast<double>(j) + 0.5) * cfg.delta, 0.0, road_length);
      s.position[j * k + u] = x;
      std::size_t best = 0;
      double best_gain = -1.0;
      for (std::size_t i = 0; i < n_b; ++i) {
        const double bx = (2.0 * static_cast<double>(i) + 1.0) * cfg.cell_radius;
        const double g = path_gain(std::hypot(x - bx, offset));
        if (g > best_gain) {
          best_gain = g;
          best = i;
        }
      }
      s.gain[j * k + u] = best_gain;
      s.assoc[(best * t_f + j) * k + u] = 1.0;
    }
  }
  for (std::size_t i = 0; i < n_b; ++i) {
    const double mean = mean_bandwidth_of(cfg, i);
    std::normal_distribution<double> w(mean, cfg.bandwidth_std_fraction * mean);
    for (std::size_t j = 0; j < t_f; ++j) s.bandwidth[i * t_f + j] = std::max(0.0, w(rng));
  }
  return s;
}

/// r_k^j = W^j log2(1 + alpha N_tx P_max / sigma^2) / (B Delta), W^j of the serving BS.
inline Tensor compute_average_rates(const PraScenario& s, const PraConfig& cfg) {
  const double sigma2 = noise_power(cfg);
  const std::size_t t_f = s.t_f();
  Tensor r({t_f, s.k});
  for (std::size_t j = 0; j < t_f; ++j)
    for (std::size_t u = 0; u < s.k; ++u) {
      const double w = s.bandwidth[s.serving_bs(j, u) * t_f + j];
      const double snr = s.gain[j * s.k + u] * static_cast<double>(cfg.n_tx) * cfg.p_max / sigma2;
      r[j * s.k + u] = w * std::log2(1.0 + snr) / (cfg.file_bits * cfg.delta);
    }
  return r;
}

inline PraInstance make_instance(const PraScenario& s, const PraConfig& cfg) {
  return PraInstance{s.k, s.t_f(), s.n_b(), compute_average_rates(s, cfg), s.assoc};
}

inline bool has_degenerate_user(const PraInstance& inst) {
  for (std::size_t u = 0; u < inst.k; ++u) {
    bool any = false;
    for (std::size_t j = 0; j < inst.t_f; ++j) any = any || inst.r[j * inst.k + u] > 0.0;
    if (!any) return true;
  }
  return false;
}

/// Checks that r and m agree with the declared K, T_f, N_b and that every user has exactly one BS per frame.
inline void validate_instance(const PraInstance& inst) {
  if (inst.k == 0 || inst.t_f == 0 || inst.n_b == 0) throw ShapeError("instance: empty dimension");
  if (inst.r.size() != inst.t_f * inst.k) throw ShapeError("instance: r is not T_f x K");
  if (inst.m.size() != inst.n_b * inst.t_f * inst.k) throw ShapeError("instance: m is not N_b x T_f x K");
  for (double v : inst.r.values())
    if (!(v >= 0.0) || !std::isfinite(v)) throw ContractError("instance: rates must be finite and non-negative");
  for (std::size_t j = 0; j < inst.t_f; ++j)
    for (std::size_t u = 0; u < inst.k; ++u) {
      double total = 0.0;
      for (std::size_t i = 0; i < inst.n_b; ++i) {
        const double v = inst.m[(i * inst.t_f + j) * inst.k + u];
        if (v != 0.0 && v != 1.0) throw ContractError("instance: association entries must be 0 or 1");
        total += v;
      }
      if (total != 1.0) throw ContractError("instance: each user needs exactly one serving BS per frame");
    }
}

}  // namespace pinn::pra
