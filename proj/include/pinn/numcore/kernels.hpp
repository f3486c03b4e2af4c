#pragma once

// Forward kernels on plain tensors. The differentiable ops in ops.hpp are thin
// wrappers that call these and record a backward closure.

#include <Eigen/Core>
#include <cmath>

#include "pinn/numcore/tensor.hpp"

namespace pinn::numcore::kernels {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

template <class F>
Tensor map(const Tensor& a, F&& f) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}

template <class F>
Tensor zip(const Tensor& a, const Tensor& b, const char* op, F&& f) {
  require_same_shape(a, b, op);
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
  return out;
}

inline void add_into(Tensor& acc, const Tensor& g) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
}

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul: " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  }
  const auto m = static_cast<Eigen::Index>(a.dim(0));
  const auto k = static_cast<Eigen::Index>(a.dim(1));
  const auto n = static_cast<Eigen::Index>(b.dim(1));
  Tensor out({a.dim(0), b.dim(1)});
  if (m == 0 || n == 0) return out;
  MutMap(out.data(), m, n).noalias() = ConstMap(a.data(), m, k) * ConstMap(b.data(), k, n);
  return out;
}

inline Tensor transpose(const Tensor& a) {
  if (a.rank() != 2) throw ShapeError("transpose: rank-2 tensor required");
  Tensor out({a.dim(1), a.dim(0)});
  for (std::size_t i = 0; i < a.dim(0); ++i)
    for (std::size_t j = 0; j < a.dim(1); ++j) out(j, i) = a(i, j);
  return out;
}

/// Splits `shape` around `axis` into (outer, n, inner) extents.
struct AxisView {
  std::size_t outer = 1;
  std::size_t n = 1;
  std::size_t inner = 1;
};

inline AxisView axis_view(const Shape& shape, std::size_t axis) {
  if (axis >= shape.size()) throw ShapeError("axis " + std::to_string(axis) + " out of range for " + shape_str(shape));
  AxisView v;
  for (std::size_t i = 0; i < axis; ++i) v.outer *= shape[i];
  v.n = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) v.inner *= shape[i];
  return v;
}

/// out[..., i, ...] = sum_j m(i, j) * t[..., j, ...] along `axis`.
inline Tensor contract(const Tensor& t, const Tensor& m, std::size_t axis) {
  const AxisView v = axis_view(t.shape(), axis);
  if (m.rank() != 2 || m.dim(1) != v.n) {
    throw ShapeError("contract: matrix " + shape_str(m.shape()) + " against axis " + std::to_string(axis) +
                     " of " + shape_str(t.shape()));
  }
  const std::size_t rows = m.dim(0);
  Shape out_shape = t.shape();
  out_shape[axis] = rows;
  Tensor out(out_shape);
  if (out.size() == 0 || t.size() == 0) return out;
  if (v.inner == 1) {
    const auto p = static_cast<Eigen::Index>(v.outer);
    MutMap(out.data(), p, static_cast<Eigen::Index>(rows)).noalias() =
        ConstMap(t.data(), p, static_cast<Eigen::Index>(v.n)) *
        ConstMap(m.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(v.n)).transpose();
    return out;
  }
  for (std::size_t p = 0; p < v.outer; ++p) {
    const double* src = t.data() + p * v.n * v.inner;
    double* dst = out.data() + p * rows * v.inner;
    for (std::size_t i = 0; i < rows; ++i) {
      double* drow = dst + i * v.inner;
      for (std::size_t j = 0; j < v.n; ++j) {
        const double w = m(i, j);
        const double* srow = src + j * v.inner;
        for (std::size_t q = 0; q < v.inner; ++q) drow[q] += w * srow[q];
      }
    }
  }
  return out;
}

/// Gradient of contract() with respect to the matrix: sum over outer/inner of g (x) t.
inline Tensor contract_matrix_grad(const Tensor& g, const Tensor& t, std::size_t axis) {
  const AxisView vt = axis_view(t.shape(), axis);
  const AxisView vg = axis_view(g.shape(), axis);
  Tensor dm({vg.n, vt.n});
  if (t.size() == 0) return dm;
  if (vt.inner == 1) {
    MutMap(dm.data(), static_cast<Eigen::Index>(vg.n), static_cast<Eigen::Index>(vt.n)).noalias() =
        ConstMap(g.data(), static_cast<Eigen::Index>(vg.outer), static_cast<Eigen::Index>(vg.n)).transpose() *
        ConstMap(t.data(), static_cast<Eigen::Index>(vt.outer), static_cast<Eigen::Index>(vt.n));
    return dm;
  }
  for (std::size_t p = 0; p < vt.outer; ++p) {
    const double* tp = t.data() + p * vt.n * vt.inner;
    const double* gp = g.data() + p * vg.n * vg.inner;
    for (std::size_t i = 0; i < vg.n; ++i)
      for (std::size_t j = 0; j < vt.n; ++j) {
        double s = 0.0;
        for (std::size_t q = 0; q < vt.inner; ++q) s += gp[i * vt.inner + q] * tp[j * vt.inner + q];
        dm(i, j) += s;
      }
  }
  return dm;
}

/// Sum along `axis`, keeping it with extent 1.
inline Tensor sum_axis(const Tensor& t, std::size_t axis) {
  const AxisView v = axis_view(t.shape(), axis);
  Shape out_shape = t.shape();
  out_shape[axis] = 1;
  Tensor out(out_shape);
  for (std::size_t p = 0; p < v.outer; ++p)
    for (std::size_t j = 0; j < v.n; ++j) {
      const double* src = t.data() + (p * v.n + j) * v.inner;
      double* dst = out.data() + p * v.inner;
      for (std::size_t q = 0; q < v.inner; ++q) dst[q] += src[q];
    }
  return out;
}

/// Repeats an extent-1 `axis` n times.
inline Tensor broadcast_axis(const Tensor& t, std::size_t axis, std::size_t n) {
  const AxisView v = axis_view(t.shape(), axis);
  if (v.n != 1) throw ShapeError("broadcast_axis: axis " + std::to_string(axis) + " of " + shape_str(t.shape()) + " is not 1");
  Shape out_shape = t.shape();
  out_shape[axis] = n;
  Tensor out(out_shape);
  for (std::size_t p = 0; p < v.outer; ++p)
    for (std::size_t j = 0; j < n; ++j)
      std::copy_n(t.data() + p * v.inner, v.inner, out.data() + (p * n + j) * v.inner);
  return out;
}

}  // namespace pinn::numcore::kernels
