#pragma once

#include <string>
#include <string_view>

#include "pinn/numcore/ops.hpp"

namespace pinn::numcore {

enum class Activation { softplus, sigmoid, identity };

inline Var activate(Var x, Activation act) {
  switch (act) {
    case Activation::softplus: return softplus(x);
    case Activation::sigmoid: return sigmoid(x);
    case Activation::identity: return x;
  }
  return x;
}

inline std::string_view to_string(Activation act) {
  switch (act) {
    case Activation::softplus: return "softplus";
    case Activation::sigmoid: return "sigmoid";
    case Activation::identity: return "identity";
  }
  return "identity";
}

inline Activation activation_from_string(std::string_view s) {
  if (s == "softplus") return Activation::softplus;
  if (s == "sigmoid") return Activation::sigmoid;
  if (s == "identity") return Activation::identity;
  throw ContractError("unknown activation '" + std::string(s) + "'");
}

}  // namespace pinn::numcore
