#pragma once

#include "pinn/equinet/fc.hpp"

namespace pinn::equinet {

/// Scalar network K -> beta_K. The head activation defaults to softplus so beta stays positive.
struct BetaSpec {
  std::size_t hidden = 10;
  Activation hidden_activation = Activation::softplus;
  Activation head = Activation::softplus;
  bool bias = false;

  FcSpec fc() const { return FcSpec{{1, hidden, 1}, {hidden_activation, head}, bias}; }
};

struct BetaNetParams {
  BetaSpec spec;
  FcParams net;
};

inline BetaNetParams build_beta(const BetaSpec& spec, Init init, Rng& rng) {
  if (spec.hidden == 0) throw ContractError("beta: hidden width must be positive");
  return BetaNetParams{spec, build_fc(spec.fc(), init, rng)};
}

template <class Self>
  requires std::is_same_v<std::remove_const_t<Self>, BetaNetParams>
NamedTensors<Self> named_tensors(Self& p) {
  return named_tensors(p.net);
}

/// Rank-0 beta for entity count k.
inline Var beta_apply(Binder& bind, const BetaNetParams& bp, std::size_t k) {
  if (k == 0) throw ContractError("beta: K must be at least 1");
  Var in = bind.tape().constant(Tensor({1, 1}, {static_cast<double>(k)}));
  return numcore::reshape(fc_apply(bind, bp.net, in), {});
}

inline double beta_forward(const BetaNetParams& bp, std::size_t k) {
  numcore::Tape tape;
  Binder bind(tape, false);
  return beta_apply(bind, bp, k).value().item();
}

inline std::size_t count_params(const BetaSpec& spec) { return count_params(spec.fc()); }
inline std::size_t count_params(const BetaNetParams& bp) { return count_params(bp.net); }

}  // namespace pinn::equinet
