#pragma once

#include "pinn/equinet/init.hpp"
#include "pinn/numcore/activation.hpp"
#include "pinn/numcore/binder.hpp"

namespace pinn::equinet {

using numcore::Activation;
using numcore::Binder;
using numcore::Var;

struct FcSpec {
  std::vector<std::size_t> widths;  // input, hidden..., output
  std::vector<Activation> activations;  // one per layer
  bool bias = true;

  std::size_t layers() const { return widths.empty() ? 0 : widths.size() - 1; }

  void validate() const {
    if (widths.empty()) throw ContractError("fc: at least the input width is required");
    for (auto w : widths)
      if (w == 0) throw ContractError("fc: widths must be positive");
    if (activations.size() != layers()) throw ContractError("fc: need one activation per layer");
  }
};

struct FcLayer {
  Tensor weight;  // [out, in]
  Tensor bias;    // [out], empty when disabled
};

struct FcParams {
  FcSpec spec;
  std::vector<FcLayer> layers;
};

inline FcParams build_fc(const FcSpec& spec, Init init, Rng& rng) {
  spec.validate();
  FcParams p{spec, {}};
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    const std::size_t in = spec.widths[l], out = spec.widths[l + 1];
    FcLayer layer{init_tensor({out, in}, in, out, init, rng), Tensor{}};
    if (spec.bias) layer.bias = Tensor::zeros({out});
    p.layers.push_back(std::move(layer));
  }
  return p;
}

template <class Self>
  requires std::is_same_v<std::remove_const_t<Self>, FcParams>
NamedTensors<Self> named_tensors(Self& p) {
  NamedTensors<Self> out;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    out.emplace_back("layer" + std::to_string(l) + ".W", &p.layers[l].weight);
    if (p.spec.bias) out.emplace_back("layer" + std::to_string(l) + ".b", &p.layers[l].bias);
  }
  return out;
}

/// x: [B, in] -> [B, out].
inline Var fc_apply(Binder& bind, const FcParams& p, Var x) {
  if (x.value().rank() != 2 || p.spec.widths.empty() || x.shape()[1] != p.spec.widths.front()) {
    throw ShapeError("fc: input " + numcore::shape_str(x.shape()) + " does not match width " +
                     std::to_string(p.spec.widths.empty() ? 0 : p.spec.widths.front()));
  }
  Var h = x;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    h = numcore::contract(h, bind(p.layers[l].weight), 1);
    if (p.spec.bias) h = numcore::add_bias(h, bind(p.layers[l].bias));
    h = numcore::activate(h, p.spec.activations[l]);
  }
  return h;
}

/// Single-sample convenience: x of any shape with `in` elements -> [out].
inline Tensor fc_forward(const FcParams& p, const Tensor& x) {
  if (p.spec.widths.empty() || x.size() != p.spec.widths.front()) throw ShapeError("fc: input size mismatch");
  numcore::Tape tape;
  Binder bind(tape, false);
  Var y = fc_apply(bind, p, tape.constant(x.reshaped({1, x.size()})));
  return y.value().reshaped({y.size()});
}

inline std::size_t count_params(const FcSpec& spec) {
  std::size_t n = 0;
  for (std::size_t l = 0; l < spec.layers(); ++l) n += spec.widths[l] * spec.widths[l + 1] + (spec.bias ? spec.widths[l + 1] : 0);
  return n;
}

inline std::size_t count_params(const FcParams& p) { return count_params(p.spec); }

}  // namespace pinn::equinet
