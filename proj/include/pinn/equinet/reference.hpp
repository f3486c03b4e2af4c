#pragma once

// Literal evaluators of the general equivariant forms
//   y_k = eta(psi(x_k), F_{n != k} phi(x_n))
//   y_k = eta(psi(x_kk), F_{n != k} phi(x_kn), G_{n != k} xi(x_nk), H_{m,n != k} zeta(x_mn))
// with caller-supplied component functions; used as test oracles.

#include <functional>
#include <limits>
#include <string_view>

#include "pinn/numcore/tensor.hpp"

namespace pinn::equinet {

using numcore::Tensor;

enum class Reducer { sum, product, max, min };

inline Reducer reducer_from_string(std::string_view s) {
  if (s == "sum") return Reducer::sum;
  if (s == "product") return Reducer::product;
  if (s == "max") return Reducer::max;
  if (s == "min") return Reducer::min;
  throw ContractError("reducer '" + std::string(s) + "' is not a supported commutative operation");
}

/// Elementwise fold; the empty fold is the reducer's identity.
class Fold {
 public:
  Fold(Reducer r, std::size_t n) : r_(r), acc_(Tensor::filled({n}, identity(r))) {}

  void add(const Tensor& v) {
    if (v.size() != acc_.size()) throw ShapeError("reducer: component outputs differ in size");
    for (std::size_t i = 0; i < v.size(); ++i) {
      double& a = acc_[i];
      switch (r_) {
        case Reducer::sum: a += v[i]; break;
        case Reducer::product: a *= v[i]; break;
        case Reducer::max: a = std::max(a, v[i]); break;
        case Reducer::min: a = std::min(a, v[i]); break;
      }
    }
  }

  const Tensor& value() const { return acc_; }

 private:
  static double identity(Reducer r) {
    switch (r) {
      case Reducer::sum: return 0.0;
      case Reducer::product: return 1.0;
      case Reducer::max: return -std::numeric_limits<double>::infinity();
      case Reducer::min: return std::numeric_limits<double>::infinity();
    }
    return 0.0;
  }

  Reducer r_;
  Tensor acc_;
};

using BlockFn = std::function<Tensor(const Tensor&)>;
using Combine1d = std::function<Tensor(const Tensor&, const Tensor&)>;
using Combine2d = std::function<Tensor(const Tensor&, const Tensor&, const Tensor&, const Tensor&)>;

/// blocks: K input blocks; phi must produce `phi_width` values.
inline std::vector<Tensor> reference_pi_1d(const std::vector<Tensor>& blocks, const BlockFn& psi, const BlockFn& phi,
                                           std::size_t phi_width, const Combine1d& eta, Reducer reducer) {
  std::vector<Tensor> phis;
  for (const auto& b : blocks) phis.push_back(phi(b));
  std::vector<Tensor> y;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    Fold f(reducer, phi_width);
    for (std::size_t n = 0; n < blocks.size(); ++n)
      if (n != k) f.add(phis[n]);
    y.push_back(eta(psi(blocks[k]), f.value()));
  }
  return y;
}

struct Reducers2d {
  Reducer row = Reducer::sum;
  Reducer col = Reducer::sum;
  Reducer rest = Reducer::sum;
};

/// blocks[m][n]: the K x K input blocks. phi, xi and zeta each produce `width` values.
inline std::vector<Tensor> reference_pi_2d(const std::vector<std::vector<Tensor>>& blocks, const BlockFn& psi,
                                           const BlockFn& phi, const BlockFn& xi, const BlockFn& zeta, std::size_t width,
                                           const Combine2d& eta, Reducers2d reducers) {
  const std::size_t k = blocks.size();
  for (const auto& row : blocks)
    if (row.size() != k) throw ShapeError("reference_pi_2d: blocks must be K x K");
  std::vector<Tensor> y;
  for (std::size_t i = 0; i < k; ++i) {
    Fold row(reducers.row, width), col(reducers.col, width), rest(reducers.rest, width);
    for (std::size_t n = 0; n < k; ++n) {
      if (n == i) continue;
      row.add(phi(blocks[i][n]));
      col.add(xi(blocks[n][i]));
    }
    for (std::size_t m = 0; m < k; ++m)
      for (std::size_t n = 0; n < k; ++n)
        if (m != i && n != i) rest.add(zeta(blocks[m][n]));
    y.push_back(eta(psi(blocks[i][i]), row.value(), col.value(), rest.value()));
  }
  return y;
}

}  // namespace pinn::equinet
