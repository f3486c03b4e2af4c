#pragma once

#include <optional>

#include "pinn/equinet/fc.hpp"

namespace pinn::equinet {

struct BlockDims {
  std::size_t rows = 1;
  std::size_t cols = 1;
  friend bool operator==(const BlockDims&, const BlockDims&) = default;
};

/// Block dimensions of H^[0] (input) .. H^[L]; inputs use the block layout [K, K, rows, cols].
struct Pinn2dSpec {
  std::vector<BlockDims> dims;
  std::vector<Activation> activations;

  std::size_t layers() const { return dims.empty() ? 0 : dims.size() - 1; }

  void validate() const {
    if (dims.empty()) throw ContractError("pinn2d: at least the input block dims are required");
    for (const auto& d : dims)
      if (d.rows == 0 || d.cols == 0) throw ContractError("pinn2d: block dims must be positive");
    if (activations.size() != layers()) throw ContractError("pinn2d: need one activation per layer");
  }
};

struct Pinn2dLayer {
  Tensor a, b;  // left factors [rows_out, rows_in]
  Tensor c, d;  // right factors [cols_out, cols_in]
};

struct Pinn2dParams {
  Pinn2dSpec spec;
  std::vector<Pinn2dLayer> layers;
};

inline Pinn2dParams build_pinn2d(const Pinn2dSpec& spec, Init init, Rng& rng) {
  spec.validate();
  Pinn2dParams p{spec, {}};
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    const BlockDims in = spec.dims[l], out = spec.dims[l + 1];
    Pinn2dLayer layer;
    layer.a = init_tensor({out.rows, in.rows}, in.rows, out.rows, init, rng);
    layer.b = init_tensor({out.rows, in.rows}, in.rows, out.rows, init, rng);
    layer.c = init_tensor({out.cols, in.cols}, in.cols, out.cols, init, rng);
    layer.d = init_tensor({out.cols, in.cols}, in.cols, out.cols, init, rng);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

template <class Self>
  requires std::is_same_v<std::remove_const_t<Self>, Pinn2dParams>
NamedTensors<Self> named_tensors(Self& p) {
  NamedTensors<Self> out;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const std::string pre = "layer" + std::to_string(l) + ".";
    out.emplace_back(pre + "A", &p.layers[l].a);
    out.emplace_back(pre + "B", &p.layers[l].b);
    out.emplace_back(pre + "C", &p.layers[l].c);
    out.emplace_back(pre + "D", &p.layers[l].d);
  }
  return out;
}

/// X: [B, K, K, rows_0, cols_0] -> diagonal readout [B, K, rows_L * cols_L].
/// Each layer computes H <- g(P H Q^T) blockwise:
///   (P H)_mn = (beta A - B) h_mn + B sum_m' h_m'n, and likewise on the right with C, D.
inline Var pinn2d_apply(Binder& bind, const Pinn2dParams& p, Var x, std::optional<Var> beta = std::nullopt) {
  const Shape& s = x.shape();
  if (p.spec.dims.empty() || s.size() != 5 || s[1] != s[2] || s[3] != p.spec.dims.front().rows ||
      s[4] != p.spec.dims.front().cols) {
    throw ShapeError("pinn2d: input " + numcore::shape_str(s) + " is not [B, K, K, rows, cols] for the spec");
  }
  const std::size_t k = s[1];
  if (k == 0) throw ContractError("pinn2d: K must be at least 1");
  auto diag_factor = [&](const Tensor& own, const Tensor& other) {
    Var o = bind(own);
    return numcore::sub(beta ? numcore::scale_by(o, *beta) : o, bind(other));
  };
  Var h = x;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const Pinn2dLayer& L = p.layers[l];
    Var left = numcore::add(numcore::contract(h, diag_factor(L.a, L.b), 3),
                            numcore::broadcast_axis(numcore::contract(numcore::sum_axis(h, 1), bind(L.b), 3), 1, k));
    h = numcore::add(numcore::contract(left, diag_factor(L.c, L.d), 4),
                     numcore::broadcast_axis(numcore::contract(numcore::sum_axis(left, 2), bind(L.d), 4), 2, k));
    h = numcore::activate(h, p.spec.activations[l]);
  }
  const BlockDims out = p.spec.dims.back();
  return numcore::diag_blocks(numcore::reshape(h, {s[0], k, k, out.rows * out.cols}));
}

/// Single sample in block layout (K*K*rows*cols values) -> [K, rows_L * cols_L].
inline Tensor pinn2d_forward(const Pinn2dParams& p, const Tensor& x, std::size_t k, std::optional<double> beta = std::nullopt) {
  if (k == 0) throw ContractError("pinn2d: K must be at least 1");
  if (p.spec.dims.empty()) throw ShapeError("pinn2d: empty spec");
  const BlockDims in = p.spec.dims.front();
  if (x.size() != k * k * in.rows * in.cols) {
    throw ShapeError("pinn2d: " + std::to_string(x.size()) + " values do not split into " + std::to_string(k) + "x" +
                     std::to_string(k) + " blocks of " + std::to_string(in.rows) + "x" + std::to_string(in.cols));
  }
  numcore::Tape tape;
  Binder bind(tape, false);
  std::optional<Var> b;
  if (beta) b = tape.constant(Tensor::scalar(*beta));
  Var y = pinn2d_apply(bind, p, tape.constant(x.reshaped({1, k, k, in.rows, in.cols})), b);
  return y.value().reshaped({k, y.shape()[2]});
}

/// Block layout [K, K, r, c] <-> dense (K r) x (K c) matrix.
inline Tensor blocks_to_dense(const Tensor& x, std::size_t k, BlockDims dims) {
  if (x.size() != k * k * dims.rows * dims.cols) throw ShapeError("blocks_to_dense: size mismatch");
  Tensor out({k * dims.rows, k * dims.cols});
  for (std::size_t m = 0; m < k; ++m)
    for (std::size_t n = 0; n < k; ++n)
      for (std::size_t i = 0; i < dims.rows; ++i)
        for (std::size_t j = 0; j < dims.cols; ++j)
          out(m * dims.rows + i, n * dims.cols + j) = x[((m * k + n) * dims.rows + i) * dims.cols + j];
  return out;
}

inline Tensor dense_to_blocks(const Tensor& x, std::size_t k, BlockDims dims) {
  if (x.rank() != 2 || x.dim(0) != k * dims.rows || x.dim(1) != k * dims.cols) throw ShapeError("dense_to_blocks: shape mismatch");
  Tensor out({k, k, dims.rows, dims.cols});
  for (std::size_t m = 0; m < k; ++m)
    for (std::size_t n = 0; n < k; ++n)
      for (std::size_t i = 0; i < dims.rows; ++i)
        for (std::size_t j = 0; j < dims.cols; ++j)
          out[((m * k + n) * dims.rows + i) * dims.cols + j] = x(m * dims.rows + i, n * dims.cols + j);
  return out;
}

/// Materialized left/right matrices of every layer for a fixed K.
struct Pinn2dDense {
  std::size_t k = 0;
  std::vector<BlockDims> dims;
  std::vector<Activation> activations;
  std::vector<Tensor> p;  // [K rows_out, K rows_in]
  std::vector<Tensor> q;  // [K cols_out, K cols_in]
};

inline Tensor tile_blocks(const Tensor& own, const Tensor& other, std::size_t k, double beta) {
  const std::size_t r = own.dim(0), c = own.dim(1);
  Tensor out({k * r, k * c});
  for (std::size_t m = 0; m < k; ++m)
    for (std::size_t n = 0; n < k; ++n)
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out(m * r + i, n * c + j) = m == n ? beta * own(i, j) : other(i, j);
  return out;
}

inline Pinn2dDense expand_2d_to_dense(const Pinn2dParams& p, std::size_t k, double beta = 1.0) {
  if (k == 0) throw ContractError("pinn2d: K must be at least 1");
  Pinn2dDense dense{k, p.spec.dims, p.spec.activations, {}, {}};
  for (const auto& L : p.layers) {
    dense.p.push_back(tile_blocks(L.a, L.b, k, beta));
    dense.q.push_back(tile_blocks(L.c, L.d, k, beta));
  }
  return dense;
}

/// Dense-matrix forward H <- g(P H Q^T) on a (K r) x (K c) input; returns [K, rows_L * cols_L].
inline Tensor dense_2d_forward(const Pinn2dDense& dense, const Tensor& x) {
  using numcore::kernels::matmul;
  using numcore::kernels::transpose;
  Tensor h = x;
  for (std::size_t l = 0; l < dense.p.size(); ++l) {
    h = matmul(matmul(dense.p[l], h), transpose(dense.q[l]));
    numcore::Tape tape;
    h = numcore::activate(tape.constant(std::move(h)), dense.activations[l]).value();
  }
  const BlockDims out = dense.dims.back();
  Tensor blocks = dense_to_blocks(h, dense.k, out);
  Tensor y({dense.k, out.rows * out.cols});
  for (std::size_t m = 0; m < dense.k; ++m)
    std::copy_n(blocks.data() + (m * dense.k + m) * out.rows * out.cols, out.rows * out.cols, y.data() + m * out.rows * out.cols);
  return y;
}

inline std::size_t count_params(const Pinn2dSpec& spec) {
  std::size_t n = 0;
  for (std::size_t l = 0; l < spec.layers(); ++l)
    n += 2 * spec.dims[l].rows * spec.dims[l + 1].rows + 2 * spec.dims[l].cols * spec.dims[l + 1].cols;
  return n;
}

inline std::size_t count_params(const Pinn2dParams& p) { return count_params(p.spec); }

}  // namespace pinn::equinet
