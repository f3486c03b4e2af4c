#pragma once

#include <algorithm>
#include <numeric>

#include "pinn/equinet/pinn2d.hpp"

namespace pinn::equinet {

/// Block permutation Lambda, zero-based: block k of Lambda^T x is block perm[k] of x.
class BlockPermutation {
 public:
  explicit BlockPermutation(std::vector<std::size_t> perm) : perm_(std::move(perm)) {
    std::vector<bool> seen(perm_.size(), false);
    for (auto p : perm_) {
      if (p >= perm_.size() || seen[p]) throw ContractError("permutation: not a bijection on 0..K-1");
      seen[p] = true;
    }
  }

  static BlockPermutation identity(std::size_t k) {
    std::vector<std::size_t> p(k);
    std::iota(p.begin(), p.end(), std::size_t{0});
    return BlockPermutation(std::move(p));
  }

  static BlockPermutation random(std::size_t k, Rng& rng) {
    BlockPermutation p = identity(k);
    std::shuffle(p.perm_.begin(), p.perm_.end(), rng);
    return p;
  }

  BlockPermutation inverse() const {
    std::vector<std::size_t> inv(perm_.size());
    for (std::size_t i = 0; i < perm_.size(); ++i) inv[perm_[i]] = i;
    return BlockPermutation(std::move(inv));
  }

  std::size_t size() const noexcept { return perm_.size(); }
  std::size_t operator[](std::size_t k) const { return perm_[k]; }
  const std::vector<std::size_t>& indices() const noexcept { return perm_; }

 private:
  std::vector<std::size_t> perm_;
};

/// Lambda^T x for x holding K contiguous blocks of `block_width` values; the shape is kept.
inline Tensor permute_blocks_1d(const Tensor& x, const BlockPermutation& perm, std::size_t block_width) {
  const std::size_t k = perm.size();
  if (block_width == 0 || x.size() != k * block_width) {
    throw ShapeError("permute_blocks_1d: " + std::to_string(x.size()) + " values do not split into " + std::to_string(k) +
                     " blocks of " + std::to_string(block_width));
  }
  Tensor out(x.shape());
  for (std::size_t i = 0; i < k; ++i) std::copy_n(x.data() + perm[i] * block_width, block_width, out.data() + i * block_width);
  return out;
}

/// Lambda^T X Lambda for X in block layout [K, K, rows, cols]; the shape is kept.
inline Tensor permute_blocks_2d(const Tensor& x, const BlockPermutation& perm, BlockDims dims) {
  const std::size_t k = perm.size();
  const std::size_t block = dims.rows * dims.cols;
  if (block == 0 || x.size() != k * k * block) throw ShapeError("permute_blocks_2d: size does not split into K x K blocks");
  Tensor out(x.shape());
  for (std::size_t m = 0; m < k; ++m)
    for (std::size_t n = 0; n < k; ++n)
      std::copy_n(x.data() + (perm[m] * k + perm[n]) * block, block, out.data() + (m * k + n) * block);
  return out;
}

}  // namespace pinn::equinet
