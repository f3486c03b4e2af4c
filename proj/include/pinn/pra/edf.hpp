#pragma once

#include <cmath>
#include <random>

#include "pinn/pra/scenario.hpp"

namespace pinn::pra {

struct EdfResult {
  double total_time = 0.0;  // frames, summed over users
  std::vector<std::size_t> slots;  // per user
  bool finished = true;
};

/// Non-predictive slot scheduler: every BS serves, in each slot, the associated user with the
/// earliest deadline; all deadlines coincide with the window end, so the tie-break on most
/// remaining bits decides, then the lowest index. Beyond the window the last frame's rates and
/// association are held. With fading on, each slot's SNR is scaled by a Gamma(N_tx, 1/N_tx) gain.
inline EdfResult edf_baseline(const PraScenario& s, const PraConfig& cfg, Rng& rng, std::size_t max_frames = 0) {
  const Tensor rates = compute_average_rates(s, cfg);
  const std::size_t k = s.k, t_f = s.t_f(), t_s = cfg.t_s;
  if (max_frames == 0) max_frames = 1000 * t_f;
  const double sigma2 = noise_power(cfg);
  std::gamma_distribution<double> fading(static_cast<double>(cfg.n_tx), 1.0 / static_cast<double>(cfg.n_tx));

  std::vector<double> remaining(k, 1.0);  // fraction of the file still to send
  EdfResult res;
  res.slots.assign(k, 0);
  std::size_t left = k;
  for (std::size_t frame = 0; left > 0 && frame < max_frames; ++frame) {
    const std::size_t j = std::min(frame, t_f - 1);
    for (std::size_t slot = 0; slot < t_s && left > 0; ++slot) {
      for (std::size_t i = 0; i < s.n_b(); ++i) {
        std::size_t pick = k;
        for (std::size_t u = 0; u < k; ++u) {
          if (remaining[u] <= 0.0 || s.assoc[(i * t_f + j) * k + u] == 0.0) continue;
          if (pick == k || remaining[u] > remaining[pick]) pick = u;
        }
        if (pick == k) continue;
        double per_slot = rates[j * k + pick] / static_cast<double>(t_s);
        if (cfg.edf_fading) {
          const double snr = s.gain[j * k + pick] * static_cast<double>(cfg.n_tx) * cfg.p_max / sigma2;
          const double w = s.bandwidth[i * t_f + j];
          per_slot = w * std::log2(1.0 + snr * fading(rng)) / (cfg.file_bits * cfg.delta * static_cast<double>(t_s));
        }
        remaining[pick] -= per_slot;
        ++res.slots[pick];
        if (remaining[pick] <= 1e-12) {
          remaining[pick] = 0.0;
          --left;
        }
      }
    }
  }
  res.finished = left == 0;
  for (auto n : res.slots) res.total_time += static_cast<double>(n) / static_cast<double>(t_s);
  return res;
}

}  // namespace pinn::pra
