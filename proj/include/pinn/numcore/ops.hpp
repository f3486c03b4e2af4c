#pragma once

// Differentiable primitives. Each computes its value with a kernel and records a closure
// that reads operand values back from the tape during the reverse sweep.

#include <cmath>
#include <optional>

#include "pinn/numcore/kernels.hpp"
#include "pinn/numcore/tape.hpp"

namespace pinn::numcore {

namespace detail {

inline Tape& same_tape(Var a, Var b, const char* op) {
  if (a.tape == nullptr || a.tape != b.tape) throw ContractError(std::string(op) + ": operands on different tapes");
  return *a.tape;
}

inline bool wants(const Tape* t, std::size_t id) { return t->requires_grad(id); }

}  // namespace detail

inline Var add(Var a, Var b) {
  Tape& t = detail::same_tape(a, b, "add");
  Tensor out = kernels::zip(a.value(), b.value(), "add", [](double x, double y) { return x + y; });
  return t.record(std::move(out), {a.id, b.id}, [tp = &t, a = a.id, b = b.id](const Tensor& g, std::vector<Tensor>& gs) {
    if (detail::wants(tp, a)) accumulate(gs, a, g);
    if (detail::wants(tp, b)) accumulate(gs, b, g);
  });
}

inline Var sub(Var a, Var b) {
  Tape& t = detail::same_tape(a, b, "sub");
  Tensor out = kernels::zip(a.value(), b.value(), "sub", [](double x, double y) { return x - y; });
  return t.record(std::move(out), {a.id, b.id}, [tp = &t, a = a.id, b = b.id](const Tensor& g, std::vector<Tensor>& gs) {
    if (detail::wants(tp, a)) accumulate(gs, a, g);
    if (detail::wants(tp, b)) accumulate(gs, b, kernels::map(g, [](double v) { return -v; }));
  });
}

inline Var mul(Var a, Var b) {
  Tape& t = detail::same_tape(a, b, "mul");
  Tensor out = kernels::zip(a.value(), b.value(), "mul", [](double x, double y) { return x * y; });
  return t.record(std::move(out), {a.id, b.id}, [tp = &t, a = a.id, b = b.id](const Tensor& g, std::vector<Tensor>& gs) {
    if (detail::wants(tp, a))
      accumulate(gs, a, kernels::zip(g, tp->value(b), "mul", [](double x, double y) { return x * y; }));
    if (detail::wants(tp, b))
      accumulate(gs, b, kernels::zip(g, tp->value(a), "mul", [](double x, double y) { return x * y; }));
  });
}

inline Var div(Var a, Var b) {
  Tape& t = detail::same_tape(a, b, "div");
  Tensor out = kernels::zip(a.value(), b.value(), "div", [](double x, double y) { return x / y; });
  return t.record(std::move(out), {a.id, b.id}, [tp = &t, a = a.id, b = b.id](const Tensor& g, std::vector<Tensor>& gs) {
    const Tensor& bv = tp->value(b);
    if (detail::wants(tp, a)) accumulate(gs, a, kernels::zip(g, bv, "div", [](double x, double y) { return x / y; }));
    if (detail::wants(tp, b)) {
      const Tensor& av = tp->value(a);
      Tensor gb(bv.shape());
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] = -g[i] * (av[i] / bv[i]) / bv[i];
      accumulate(gs, b, std::move(gb));
    }
  });
}

inline Var scale(Var a, double c) {
  Tensor out = kernels::map(a.value(), [c](double x) { return c * x; });
  return a.tape->record(std::move(out), {a.id}, [a = a.id, c](const Tensor& g, std::vector<Tensor>& gs) {
    accumulate(gs, a, kernels::map(g, [c](double v) { return c * v; }));
  });
}

inline Var add_scalar(Var a, double c) {
  Tensor out = kernels::map(a.value(), [c](double x) { return x + c; });
  return a.tape->record(std::move(out), {a.id}, [a = a.id](const Tensor& g, std::vector<Tensor>& gs) {
    accumulate(gs, a, g);
  });
}

/// a * s where `s` holds a single value; gradients flow to both.
inline Var scale_by(Var a, Var s) {
  Tape& t = detail::same_tape(a, s, "scale_by");
  if (s.size() != 1) throw ShapeError("scale_by: scale must hold one value, got " + shape_str(s.shape()));
  const double sv = s.value()[0];
  Tensor out = kernels::map(a.value(), [sv](double x) { return sv * x; });
  return t.record(std::move(out), {a.id, s.id}, [tp = &t, a = a.id, s = s.id](const Tensor& g, std::vector<Tensor>& gs) {
    const Tensor& av = tp->value(a);
    const Tensor& sval = tp->value(s);
    if (detail::wants(tp, a)) {
      const double c = sval[0];
      accumulate(gs, a, kernels::map(g, [c](double v) { return c * v; }));
    }
    if (detail::wants(tp, s)) {
      double acc = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * av[i];
      accumulate(gs, s, Tensor(sval.shape(), {acc}));
    }
  });
}

inline Var matmul(Var a, Var b) {
  Tape& t = detail::same_tape(a, b, "matmul");
  Tensor out = kernels::matmul(a.value(), b.value());
  return t.record(std::move(out), {a.id, b.id}, [tp = &t, a = a.id, b = b.id](const Tensor& g, std::vector<Tensor>& gs) {
    if (detail::wants(tp, a)) accumulate(gs, a, kernels::matmul(g, kernels::transpose(tp->value(b))));
    if (detail::wants(tp, b)) accumulate(gs, b, kernels::matmul(kernels::transpose(tp->value(a)), g));
  });
}

/// Applies matrix `m` (rows x n) along `axis` of `x`, whose extent must be n.
inline Var contract(Var x, Var m, std::size_t axis) {
  Tape& t = detail::same_tape(x, m, "contract");
  Tensor out = kernels::contract(x.value(), m.value(), axis);
  return t.record(std::move(out), {x.id, m.id},
                  [tp = &t, x = x.id, m = m.id, axis](const Tensor& g, std::vector<Tensor>& gs) {
                    if (detail::wants(tp, x))
                      accumulate(gs, x, kernels::contract(g, kernels::transpose(tp->value(m)), axis));
                    if (detail::wants(tp, m)) accumulate(gs, m, kernels::contract_matrix_grad(g, tp->value(x), axis));
                  });
}

inline Var sum_axis(Var x, std::size_t axis) {
  Tensor out = kernels::sum_axis(x.value(), axis);
  const std::size_t n = x.shape().at(axis);
  return x.tape->record(std::move(out), {x.id}, [x = x.id, axis, n](const Tensor& g, std::vector<Tensor>& gs) {
    accumulate(gs, x, kernels::broadcast_axis(g, axis, n));
  });
}

inline Var broadcast_axis(Var x, std::size_t axis, std::size_t n) {
  Tensor out = kernels::broadcast_axis(x.value(), axis, n);
  return x.tape->record(std::move(out), {x.id}, [x = x.id, axis](const Tensor& g, std::vector<Tensor>& gs) {
    accumulate(gs, x, kernels::sum_axis(g, axis));
  });
}

/// Sum of all entries, as a rank-0 tensor.
inline Var sum(Var x) {
  double s = 0.0;
  for (double v : x.value().values()) s += v;
  return x.tape->record(Tensor::scalar(s), {x.id}, [tp = x.tape, x = x.id](const Tensor& g, std::vector<Tensor>& gs) {
    accumulate(gs, x, Tensor::filled(tp->value(x).shape(), g[0]));
  });
}

inline Var mean(Var x) {
  if (x.size() == 0) throw ContractError("mean: empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(x.size()));
}

inline Var reshape(Var x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  return x.tape->record(std::move(out), {x.id}, [tp = x.tape, x = x.id](const Tensor& g, std::vector<Tensor>& gs) {
    accumulate(gs, x, g.reshaped(tp->value(x).shape()));
  });
}

/// Adds `bias` (extent = last axis of x) to every row.
inline Var add_bias(Var x, Var bias) {
  Tape& t = detail::same_tape(x, bias, "add_bias");
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  if (xv.rank() == 0 || bv.rank() != 1 || bv.dim(0) != xv.shape().back()) {
    throw ShapeError("add_bias: bias " + shape_str(bv.shape()) + " vs input " + shape_str(xv.shape()));
  }
  const std::size_t w = bv.dim(0);
  Tensor out = xv;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i % w];
  return t.record(std::move(out), {x.id, bias.id},
                  [tp = &t, x = x.id, b = bias.id, w](const Tensor& g, std::vector<Tensor>& gs) {
                    if (detail::wants(tp, x)) accumulate(gs, x, g);
                    if (detail::wants(tp, b)) {
                      Tensor gb({w});
                      for (std::size_t i = 0; i < g.size(); ++i) gb[i % w] += g[i];
                      accumulate(gs, b, std::move(gb));
                    }
                  });
}

inline Var softplus(Var x) {
  Tensor out = kernels::map(x.value(), kernels::softplus);
  return x.tape->record(std::move(out), {x.id}, [tp = x.tape, x = x.id](const Tensor& g, std::vector<Tensor>& gs) {
    const Tensor& xv = tp->value(x);
    Tensor gx(xv.shape());
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] = g[i] * kernels::sigmoid(xv[i]);
    accumulate(gs, x, std::move(gx));
  });
}

inline Var sigmoid(Var x) {
  Tensor out = kernels::map(x.value(), kernels::sigmoid);
  const std::size_t self = x.tape->size();
  return x.tape->record(std::move(out), {x.id}, [tp = x.tape, x = x.id, self](const Tensor& g, std::vector<Tensor>& gs) {
    const Tensor& yv = tp->value(self);
    Tensor gx(yv.shape());
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] = g[i] * yv[i] * (1.0 - yv[i]);
    accumulate(gs, x, std::move(gx));
  });
}

/// (x)^+ = max(x, 0); subgradient 0 at the kink.
inline Var relu(Var x) {
  Tensor out = kernels::map(x.value(), [](double v) { return v > 0.0 ? v : 0.0; });
  return x.tape->record(std::move(out), {x.id}, [tp = x.tape, x = x.id](const Tensor& g, std::vector<Tensor>& gs) {
    const Tensor& xv = tp->value(x);
    Tensor gx(xv.shape());
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] = xv[i] > 0.0 ? g[i] : 0.0;
    accumulate(gs, x, std::move(gx));
  });
}

inline Var square(Var x) {
  Tensor out = kernels::map(x.value(), [](double v) { return v * v; });
  return x.tape->record(std::move(out), {x.id}, [tp = x.tape, x = x.id](const Tensor& g, std::vector<Tensor>& gs) {
    const Tensor& xv = tp->value(x);
    Tensor gx(xv.shape());
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] = 2.0 * xv[i] * g[i];
    accumulate(gs, x, std::move(gx));
  });
}

inline Var sqrt(Var x) {
  Tensor out = kernels::map(x.value(), [](double v) { return std::sqrt(v); });
  const std::size_t self = x.tape->size();
  return x.tape->record(std::move(out), {x.id}, [tp = x.tape, x = x.id, self](const Tensor& g, std::vector<Tensor>& gs) {
    const Tensor& yv = tp->value(self);
    Tensor gx(yv.shape());
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] = 0.5 * g[i] / yv[i];
    accumulate(gs, x, std::move(gx));
  });
}

/// Diagonal blocks of a block matrix: [B, K, K, rest...] -> [B, K, rest...].
inline Var diag_blocks(Var x) {
  const Tensor& xv = x.value();
  if (xv.rank() < 3 || xv.dim(1) != xv.dim(2)) throw ShapeError("diag_blocks: need [B,K,K,...], got " + shape_str(xv.shape()));
  const std::size_t batch = xv.dim(0), k = xv.dim(1);
  std::size_t inner = 1;
  for (std::size_t i = 3; i < xv.rank(); ++i) inner *= xv.dim(i);
  Shape out_shape{batch, k};
  out_shape.insert(out_shape.end(), xv.shape().begin() + 3, xv.shape().end());
  Tensor out(out_shape);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t i = 0; i < k; ++i)
      std::copy_n(xv.data() + ((b * k + i) * k + i) * inner, inner, out.data() + (b * k + i) * inner);
  return x.tape->record(std::move(out), {x.id},
                        [tp = x.tape, x = x.id, batch, k, inner](const Tensor& g, std::vector<Tensor>& gs) {
                          Tensor gx(tp->value(x).shape());
                          for (std::size_t b = 0; b < batch; ++b)
                            for (std::size_t i = 0; i < k; ++i)
                              std::copy_n(g.data() + (b * k + i) * inner, inner, gx.data() + ((b * k + i) * k + i) * inner);
                          accumulate(gs, x, std::move(gx));
                        });
}

/// Concatenates along axis 0; trailing extents must agree.
inline Var concat0(const std::vector<Var>& parts) {
  if (parts.empty()) throw ContractError("concat0: no inputs");
  Tape& t = *parts.front().tape;
  Shape tail(parts.front().shape().begin() + 1, parts.front().shape().end());
  std::size_t rows = 0;
  std::vector<std::size_t> ids;
  std::vector<double> values;
  for (const Var& p : parts) {
    if (p.tape != &t) throw ContractError("concat0: operands on different tapes");
    Shape ptail(p.shape().begin() + 1, p.shape().end());
    if (p.value().rank() == 0 || ptail != tail) throw ShapeError("concat0: trailing shape mismatch");
    rows += p.shape()[0];
    ids.push_back(p.id);
    values.insert(values.end(), p.value().values().begin(), p.value().values().end());
  }
  Shape out_shape{rows};
  out_shape.insert(out_shape.end(), tail.begin(), tail.end());
  return t.record(Tensor(out_shape, std::move(values)), ids, [tp = &t, ids](const Tensor& g, std::vector<Tensor>& gs) {
    std::size_t offset = 0;
    for (std::size_t id : ids) {
      const Tensor& v = tp->value(id);
      if (detail::wants(tp, id))
        accumulate(gs, id, Tensor(v.shape(), std::vector<double>(g.data() + offset, g.data() + offset + v.size())));
      offset += v.size();
    }
  });
}

/// Rows [begin, end) along axis 0.
inline Var slice0(Var x, std::size_t begin, std::size_t end) {
  const Tensor& xv = x.value();
  if (xv.rank() == 0 || begin > end || end > xv.dim(0)) throw ShapeError("slice0: bad range");
  const std::size_t row = xv.size() / std::max<std::size_t>(xv.dim(0), 1);
  Shape out_shape = xv.shape();
  out_shape[0] = end - begin;
  Tensor out(out_shape, std::vector<double>(xv.data() + begin * row, xv.data() + end * row));
  return x.tape->record(std::move(out), {x.id}, [tp = x.tape, x = x.id, begin, row](const Tensor& g, std::vector<Tensor>& gs) {
    Tensor gx(tp->value(x).shape());
    std::copy_n(g.data(), g.size(), gx.data() + begin * row);
    accumulate(gs, x, std::move(gx));
  });
}

}  // namespace pinn::numcore
