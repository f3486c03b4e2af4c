#pragma once

#include <algorithm>
#include <cmath>

#include "pinn/numcore/ops.hpp"
#include "pinn/pra/scenario.hpp"

namespace pinn::pra {

using numcore::Var;

/// s_j = raw_j / sum_t raw_t r_t, so that sum_j s_j r_j = 1.
inline Tensor normalize_plan(const Tensor& raw, const Tensor& rates) {
  if (raw.size() != rates.size()) throw ShapeError("normalize_plan: plan and rates differ in length");
  double total = 0.0, rate_total = 0.0;
  for (std::size_t j = 0; j < raw.size(); ++j) {
    if (!(raw[j] >= 0.0)) throw ContractError("normalize_plan: raw plan must be non-negative");
    total += raw[j] * rates[j];
    rate_total += rates[j];
  }
  if (rate_total <= 0.0) throw DegenerateUserError("normalize_plan: user has zero rate in every frame");
  if (!(total > 0.0)) throw ContractError("normalize_plan: raw plan delivers nothing");
  Tensor out(raw.shape());
  for (std::size_t j = 0; j < raw.size(); ++j) out[j] = raw[j] / total;
  return out;
}

/// Per-frame per-BS allocated time: load[i, j] = sum_k m[i, j, k] s[j, k].
inline Tensor plan_loads(const Tensor& plan, const PraInstance& inst) {
  Tensor load({inst.n_b, inst.t_f});
  for (std::size_t i = 0; i < inst.n_b; ++i)
    for (std::size_t j = 0; j < inst.t_f; ++j)
      for (std::size_t u = 0; u < inst.k; ++u) load[i * inst.t_f + j] += inst.m[(i * inst.t_f + j) * inst.k + u] * plan[j * inst.k + u];
  return load;
}

struct PlanReport {
  double objective = 0.0;     // ||S||_1
  double qos_residual = 0.0;  // max_k |sum_j s r - 1|
  double max_overload = 0.0;  // max_{i,j} (load - 1), can be negative
  double min_entry = 0.0;
};

/// plan: [T_f, K] as in the instance.
inline PlanReport evaluate_plan(const Tensor& plan, const PraInstance& inst) {
  if (plan.size() != inst.t_f * inst.k) throw ShapeError("evaluate_plan: plan is not T_f x K");
  PlanReport rep;
  rep.min_entry = std::numeric_limits<double>::infinity();
  for (double v : plan.values()) {
    rep.objective += v;
    rep.min_entry = std::min(rep.min_entry, v);
  }
  for (std::size_t u = 0; u < inst.k; ++u) {
    double delivered = 0.0;
    for (std::size_t j = 0; j < inst.t_f; ++j) delivered += plan[j * inst.k + u] * inst.r[j * inst.k + u];
    rep.qos_residual = std::max(rep.qos_residual, std::abs(delivered - 1.0));
  }
  rep.max_overload = -std::numeric_limits<double>::infinity();
  const Tensor load = plan_loads(plan, inst);
  for (double l : load.values()) rep.max_overload = std::max(rep.max_overload, l - 1.0);
  return rep;
}

/// Cost of one sample: sum_i [ ||M_i * S||_1 + nu_i^T (load_i - 1) + rho/2 ||(load_i - 1)^+||^2 ].
/// plan [T_f, K], duals [N_b, T_f].
inline double pra_cost_value(const Tensor& plan, const Tensor& duals, const PraInstance& inst, double rho) {
  if (duals.size() != inst.n_b * inst.t_f) throw ShapeError("pra_cost: duals are not N_b x T_f");
  if (plan.size() != inst.t_f * inst.k) throw ShapeError("pra_cost: plan is not T_f x K");
  const Tensor load = plan_loads(plan, inst);
  double cost = 0.0;
  for (double v : plan.values()) cost += v;
  for (std::size_t l = 0; l < load.size(); ++l) {
    const double excess = load[l] - 1.0;
    cost += duals[l] * excess;
    if (excess > 0.0) cost += 0.5 * rho * excess * excess;
  }
  return cost;
}

/// Differentiable batch cost, mean over samples.
///   plan  [B, K, T_f] (user-major blocks, already normalized)
///   duals [B, N_b, T_f]
///   mask  [B, N_b, K, T_f]
inline Var pra_cost(Var plan, Var duals, const Tensor& mask, double rho) {
  using namespace numcore;
  const Shape ps = plan.shape(), ds = duals.shape();
  if (ps.size() != 3 || ds.size() != 3 || mask.rank() != 4 || mask.dim(0) != ps[0] || mask.dim(1) != ds[1] ||
      mask.dim(2) != ps[1] || mask.dim(3) != ps[2] || ds[0] != ps[0] || ds[2] != ps[2]) {
    throw ShapeError("pra_cost: plan " + shape_str(ps) + ", duals " + shape_str(ds) + ", mask " + shape_str(mask.shape()));
  }
  const std::size_t batch = ps[0], n_b = ds[1];
  Tape& tape = *plan.tape;
  Var spread = broadcast_axis(reshape(plan, {batch, 1, ps[1], ps[2]}), 1, n_b);
  Var load = reshape(sum_axis(mul(spread, tape.constant(mask)), 2), {batch, n_b, ps[2]});
  Var excess = add_scalar(load, -1.0);
  Var total = add(add(sum(plan), sum(mul(duals, excess))), scale(sum(square(relu(excess))), 0.5 * rho));
  return scale(total, 1.0 / static_cast<double>(batch));
}

}  // namespace pinn::pra
