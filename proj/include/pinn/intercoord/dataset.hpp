#pragma once

#include "pinn/equinet/permutation.hpp"
#include "pinn/intercoord/wmmse.hpp"
#include "pinn/parallel.hpp"

namespace pinn::intercoord {

struct IcSample {
  std::size_t k = 0;
  Tensor x;  // [K, K]
  Tensor y;  // [K], normalized WMMSE powers
  bool augmented = false;
};

inline IcSample label_sample(Tensor x, const WmmseConfig& cfg) {
  const std::size_t k = x.dim(0);
  Tensor y = wmmse_solve(x, cfg).y;
  return IcSample{k, std::move(x), std::move(y), false};
}

/// n samples at fixed K; sample i draws its channel from derive_rng(seed, i).
inline std::vector<IcSample> make_dataset(std::size_t n, std::size_t k, const WmmseConfig& cfg, std::uint64_t seed) {
  std::vector<IcSample> out(n);
  parallel_for(n, [&](std::size_t i) {
    Rng rng = derive_rng(seed, i);
    out[i] = label_sample(generate_channels(k, rng), cfg);
  });
  return out;
}

/// Mixture over K: a `small_fraction` share with K uniform in [1, small_k_max], the rest at k_max.
struct IcMixture {
  std::size_t samples = 0;
  std::size_t k_max = 10;
  double small_fraction = 0.8;
  std::size_t small_k_max = 5;
};

inline std::vector<IcSample> make_mixture(const IcMixture& mix, const WmmseConfig& cfg, std::uint64_t seed) {
  if (mix.k_max == 0 || mix.small_k_max == 0) throw ContractError("make_mixture: K bounds must be positive");
  const auto n_small = static_cast<std::size_t>(std::llround(mix.small_fraction * static_cast<double>(mix.samples)));
  std::vector<IcSample> out(mix.samples);
  parallel_for(mix.samples, [&](std::size_t i) {
    Rng rng = derive_rng(seed, i);
    std::size_t k = mix.k_max;
    if (i < n_small) k = std::uniform_int_distribution<std::size_t>(1, std::min(mix.small_k_max, mix.k_max))(rng);
    out[i] = label_sample(generate_channels(k, rng), cfg);
  });
  return out;
}

/// Relabels one sample: (Lambda^T X Lambda, Lambda^T y).
inline IcSample permute_sample(const IcSample& s, const equinet::BlockPermutation& perm) {
  if (perm.size() != s.k) throw ShapeError("permute_sample: permutation size differs from K");
  IcSample out{s.k, equinet::permute_blocks_2d(s.x, perm, {1, 1}), equinet::permute_blocks_1d(s.y, perm, 1), true};
  return out;
}

/// Originals followed by `count` new samples, each a uniformly random relabeling of a
/// uniformly chosen source sample.
inline std::vector<IcSample> augment(const std::vector<IcSample>& samples, std::size_t count, Rng& rng) {
  if (samples.empty() && count > 0) throw ContractError("augment: no source samples");
  std::vector<IcSample> out = samples;
  out.reserve(samples.size() + count);
  std::uniform_int_distribution<std::size_t> pick(0, samples.empty() ? 0 : samples.size() - 1);
  for (std::size_t i = 0; i < count; ++i) {
    const IcSample& src = samples[pick(rng)];
    out.push_back(permute_sample(src, equinet::BlockPermutation::random(src.k, rng)));
  }
  return out;
}

}  // namespace pinn::intercoord
