#pragma once

#include <optional>

#include "pinn/equinet/fc.hpp"

namespace pinn::equinet {

/// Per-block widths w_0 (input) .. w_L (output); layer l maps w_{l} -> w_{l+1}.
struct Pinn1dSpec {
  std::vector<std::size_t> widths;
  std::vector<Activation> activations;
  bool bias = false;

  std::size_t layers() const { return widths.empty() ? 0 : widths.size() - 1; }

  void validate() const {
    if (widths.empty()) throw ContractError("pinn1d: at least the input width is required");
    for (auto w : widths)
      if (w == 0) throw ContractError("pinn1d: widths must be positive");
    if (activations.size() != layers()) throw ContractError("pinn1d: need one activation per layer");
  }
};

struct Pinn1dLayer {
  Tensor u;  // diagonal block [out, in]
  Tensor v;  // off-diagonal block [out, in]
  Tensor a;  // shared bias [out], empty when disabled
};

struct Pinn1dParams {
  Pinn1dSpec spec;
  std::vector<Pinn1dLayer> layers;
};

inline Pinn1dParams build_pinn1d(const Pinn1dSpec& spec, Init init, Rng& rng) {
  spec.validate();
  Pinn1dParams p{spec, {}};
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    const std::size_t in = spec.widths[l], out = spec.widths[l + 1];
    Pinn1dLayer layer;
    layer.u = init_tensor({out, in}, in, out, init, rng);
    layer.v = init_tensor({out, in}, in, out, init, rng);
    if (spec.bias) layer.a = Tensor::zeros({out});
    p.layers.push_back(std::move(layer));
  }
  return p;
}

template <class Self>
  requires std::is_same_v<std::remove_const_t<Self>, Pinn1dParams>
NamedTensors<Self> named_tensors(Self& p) {
  NamedTensors<Self> out;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const std::string pre = "layer" + std::to_string(l) + ".";
    out.emplace_back(pre + "U", &p.layers[l].u);
    out.emplace_back(pre + "V", &p.layers[l].v);
    if (p.spec.bias) out.emplace_back(pre + "a", &p.layers[l].a);
  }
  return out;
}

/// x: [B, K, w_0] -> [B, K, w_L]. Each layer computes
///   h_k <- g((beta U - V) h_k + V sum_n h_n + a).
inline Var pinn1d_apply(Binder& bind, const Pinn1dParams& p, Var x, std::optional<Var> beta = std::nullopt) {
  const Shape& s = x.shape();
  if (s.size() != 3 || p.spec.widths.empty() || s[2] != p.spec.widths.front()) {
    throw ShapeError("pinn1d: input " + numcore::shape_str(s) + " is not [B, K, " +
                     std::to_string(p.spec.widths.empty() ? 0 : p.spec.widths.front()) + "]");
  }
  const std::size_t k = s[1];
  if (k == 0) throw ContractError("pinn1d: K must be at least 1");
  Var h = x;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    Var u = bind(p.layers[l].u);
    Var v = bind(p.layers[l].v);
    Var diag = numcore::sub(beta ? numcore::scale_by(u, *beta) : u, v);
    Var own = numcore::contract(h, diag, 2);
    Var pooled = numcore::contract(numcore::sum_axis(h, 1), v, 2);
    h = numcore::add(own, numcore::broadcast_axis(pooled, 1, k));
    if (p.spec.bias) h = numcore::add_bias(h, bind(p.layers[l].a));
    h = numcore::activate(h, p.spec.activations[l]);
  }
  return h;
}

/// Single sample: x holds K blocks of width w_0 (any shape with K * w_0 elements) -> [K, w_L].
inline Tensor pinn1d_forward(const Pinn1dParams& p, const Tensor& x, std::size_t k, std::optional<double> beta = std::nullopt) {
  if (k == 0) throw ContractError("pinn1d: K must be at least 1");
  if (p.spec.widths.empty() || x.size() != k * p.spec.widths.front()) {
    throw ShapeError("pinn1d: " + std::to_string(x.size()) + " values do not split into " + std::to_string(k) +
                     " blocks of width " + std::to_string(p.spec.widths.empty() ? 0 : p.spec.widths.front()));
  }
  numcore::Tape tape;
  Binder bind(tape, false);
  std::optional<Var> b;
  if (beta) b = tape.constant(Tensor::scalar(*beta));
  Var y = pinn1d_apply(bind, p, tape.constant(x.reshaped({1, k, p.spec.widths.front()})), b);
  return y.value().reshaped({k, p.spec.widths.back()});
}

/// Materializes each layer as a dense (K w_out) x (K w_in) matrix: beta U on the diagonal
/// blocks, V elsewhere, bias tiled K times.
inline FcParams expand_1d_to_dense(const Pinn1dParams& p, std::size_t k, double beta = 1.0) {
  if (k == 0) throw ContractError("pinn1d: K must be at least 1");
  FcSpec spec;
  for (auto w : p.spec.widths) spec.widths.push_back(w * k);
  spec.activations = p.spec.activations;
  spec.bias = p.spec.bias;
  FcParams dense{spec, {}};
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const Pinn1dLayer& src = p.layers[l];
    const std::size_t out = src.u.dim(0), in = src.u.dim(1);
    Tensor w({k * out, k * in});
    for (std::size_t m = 0; m < k; ++m)
      for (std::size_t n = 0; n < k; ++n)
        for (std::size_t i = 0; i < out; ++i)
          for (std::size_t j = 0; j < in; ++j) w(m * out + i, n * in + j) = m == n ? beta * src.u(i, j) : src.v(i, j);
    FcLayer layer{std::move(w), Tensor{}};
    if (spec.bias) {
      layer.bias = Tensor::zeros({k * out});
      for (std::size_t m = 0; m < k; ++m)
        for (std::size_t i = 0; i < out; ++i) layer.bias[m * out + i] = src.a[i];
    }
    dense.layers.push_back(std::move(layer));
  }
  return dense;
}

inline std::size_t count_params(const Pinn1dSpec& spec) {
  std::size_t n = 0;
  for (std::size_t l = 0; l < spec.layers(); ++l)
    n += 2 * spec.widths[l] * spec.widths[l + 1] + (spec.bias ? spec.widths[l + 1] : 0);
  return n;
}

inline std::size_t count_params(const Pinn1dParams& p) { return count_params(p.spec); }

}  // namespace pinn::equinet
