#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pinn/error.hpp"

namespace pinn::pra {

struct PraConfig {
  std::size_t n_b = 4;
  std::size_t k_max = 8;
  std::size_t t_f = 10;
  std::size_t t_s = 100;
  double delta = 1.0;           // frame duration, s
  double cell_radius = 250.0;   // m
  std::size_t n_tx = 8;
  double p_max = 40.0;          // W
  double noise_power = 0.0;     // W; 0 derives it from edge_snr_db
  double edge_snr_db = 5.0;
  std::vector<double> mean_bandwidth{10e6, 5e6, 10e6, 5e6};  // Hz, cycled over BSs
  double bandwidth_std_fraction = 0.2;
  double file_bits = 48e6;
  double speed_min = 10.0;  // m/s
  double speed_max = 25.0;
  std::vector<double> road_offsets{50.0, 100.0, 150.0};  // m
  bool edf_fading = true;

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(name, "must be positive");
    };
    if (n_b == 0) throw ValidationError("n_b", "must be positive");
    if (k_max == 0) throw ValidationError("k_max", "must be at least 1");
    if (t_f == 0) throw ValidationError("t_f", "must be positive");
    if (t_s == 0) throw ValidationError("t_s", "must be positive");
    if (n_tx == 0) throw ValidationError("n_tx", "must be positive");
    positive(delta, "delta");
    positive(cell_radius, "cell_radius");
    positive(p_max, "p_max");
    positive(file_bits, "file_bits");
    positive(speed_min, "speed_min");
    if (!(noise_power >= 0.0)) throw ValidationError("noise_power", "must be non-negative");
    if (!(speed_max >= speed_min)) throw ValidationError("speed_max", "speed range is empty");
    if (!(bandwidth_std_fraction >= 0.0)) throw ValidationError("bandwidth_std_fraction", "must be non-negative");
    if (mean_bandwidth.empty()) throw ValidationError("mean_bandwidth", "must not be empty");
    for (double w : mean_bandwidth) positive(w, "mean_bandwidth");
    if (road_offsets.empty()) throw ValidationError("road_offsets", "must not be empty");
    for (double r : road_offsets) positive(r, "road_offsets");
  }
};

/// Large-scale channel gain (linear) for a distance in metres: 36.8 + 36.7 log10(d) dB.
inline double path_gain(double distance) {
  const double loss_db = 36.8 + 36.7 * std::log10(std::max(distance, 1.0));
  return std::pow(10.0, -loss_db / 10.0);
}

/// Noise power such that alpha(R_b) N_tx P_max / sigma^2 equals the cell-edge SNR.
inline double noise_power(const PraConfig& cfg) {
  if (cfg.noise_power > 0.0) return cfg.noise_power;
  return path_gain(cfg.cell_radius) * static_cast<double>(cfg.n_tx) * cfg.p_max / std::pow(10.0, cfg.edge_snr_db / 10.0);
}

inline double mean_bandwidth_of(const PraConfig& cfg, std::size_t bs) {
  return cfg.mean_bandwidth[bs % cfg.mean_bandwidth.size()];
}

}  // namespace pinn::pra
