#pragma once

#include <cmath>
#include <random>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "pinn/numcore/tensor.hpp"
#include "pinn/rng.hpp"

namespace pinn::equinet {

using numcore::Shape;
using numcore::Tensor;

enum class Init { glorot_uniform, zeros };

/// Uniform in +-sqrt(6 / (fan_in + fan_out)), or zeros.
inline Tensor init_tensor(Shape shape, std::size_t fan_in, std::size_t fan_out, Init init, Rng& rng) {
  Tensor t(std::move(shape));
  if (init == Init::zeros) return t;
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> u(-bound, bound);
  for (double& v : t.values()) v = u(rng);
  return t;
}

template <class Self>
using TensorRef = std::conditional_t<std::is_const_v<Self>, const Tensor*, Tensor*>;

template <class Self>
using NamedTensors = std::vector<std::pair<std::string, TensorRef<Self>>>;

}  // namespace pinn::equinet
