#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <numeric>

#include "pinn/equinet.hpp"
#include "pinn/numcore/optim.hpp"
#include "pinn/pra/lp.hpp"
#include "pinn/parallel.hpp"
#include "pinn/pra/plan.hpp"

namespace pinn::pra {

using equinet::Activation;
using numcore::Binder;
using numcore::Tape;

enum class PrimalKind { pinn, pinn_adp_k, fc };

inline const char* to_string(PrimalKind k) {
  switch (k) {
    case PrimalKind::pinn: return "pinn";
    case PrimalKind::pinn_adp_k: return "pinn-adp-k";
    case PrimalKind::fc: return "fc";
  }
  return "pinn-adp-k";
}

inline PrimalKind primal_kind_from_string(std::string_view s) {
  if (s == "pinn") return PrimalKind::pinn;
  if (s == "pinn-adp-k") return PrimalKind::pinn_adp_k;
  if (s == "fc") return PrimalKind::fc;
  throw ValidationError("model", "unknown model '" + std::string(s) + "'");
}

struct PraNetSpec {
  PrimalKind kind = PrimalKind::pinn_adp_k;
  std::size_t k_max = 8;
  std::size_t t_f = 10;
  std::vector<std::size_t> hidden{20, 20};  // per-block widths (PINN) or total widths (FC)
  std::vector<std::size_t> dual_hidden{64, 32};
  std::size_t beta_hidden = 10;
};

/// DNN-s (plan network, shared by every BS) and DNN-lambda (dual network).
struct PraModel {
  PraNetSpec spec;
  equinet::Pinn1dParams primal;
  equinet::BetaNetParams beta;
  equinet::FcParams primal_fc;
  equinet::FcParams dual;
};

inline PraModel build_pra_model(const PraNetSpec& spec, Rng& rng, equinet::Init init = equinet::Init::glorot_uniform) {
  if (spec.k_max == 0 || spec.t_f == 0) throw ContractError("pra model: K_max and T_f must be positive");
  PraModel m;
  m.spec = spec;
  std::vector<Activation> acts(spec.hidden.size(), Activation::softplus);
  acts.push_back(Activation::softplus);
  if (spec.kind == PrimalKind::fc) {
    equinet::FcSpec fs{{spec.k_max * spec.t_f}, acts, true};
    fs.widths.insert(fs.widths.end(), spec.hidden.begin(), spec.hidden.end());
    fs.widths.push_back(spec.k_max * spec.t_f);
    m.primal_fc = equinet::build_fc(fs, init, rng);
  } else {
    equinet::Pinn1dSpec ps{{spec.t_f}, acts, true};
    ps.widths.insert(ps.widths.end(), spec.hidden.begin(), spec.hidden.end());
    ps.widths.push_back(spec.t_f);
    m.primal = equinet::build_pinn1d(ps, init, rng);
  }
  m.beta = equinet::build_beta(equinet::BetaSpec{spec.beta_hidden}, init, rng);
  equinet::FcSpec ds{{spec.k_max * spec.t_f}, std::vector<Activation>(spec.dual_hidden.size() + 1, Activation::softplus), true};
  ds.widths.insert(ds.widths.end(), spec.dual_hidden.begin(), spec.dual_hidden.end());
  ds.widths.push_back(spec.t_f);
  m.dual = equinet::build_fc(ds, init, rng);
  return m;
}

inline std::vector<Tensor*> primal_tensors(PraModel& m) {
  std::vector<Tensor*> out;
  if (m.spec.kind == PrimalKind::fc) {
    for (auto& [n, t] : equinet::named_tensors(m.primal_fc)) out.push_back(t);
  } else {
    for (auto& [n, t] : equinet::named_tensors(m.primal)) out.push_back(t);
  }
  if (m.spec.kind == PrimalKind::pinn_adp_k)
    for (auto& [n, t] : equinet::named_tensors(m.beta)) out.push_back(t);
  return out;
}

inline std::vector<Tensor*> dual_tensors(PraModel& m) {
  std::vector<Tensor*> out;
  for (auto& [n, t] : equinet::named_tensors(m.dual)) out.push_back(t);
  return out;
}

/// Dense per-sample tensors in the layouts the networks consume.
struct PraFeatures {
  std::size_t k = 0;
  Tensor x;       // [N_b, K, T_f]: block k of BS i is user k's rate column masked by M_i
  Tensor mask;    // [N_b, K, T_f]
  Tensor rates;   // [K, T_f]
  Tensor padded;  // [N_b, K_max T_f]
};

inline PraFeatures make_features(const PraInstance& inst, std::size_t k_max) {
  validate_instance(inst);
  if (inst.k > k_max) throw ContractError("pra: instance K exceeds K_max");
  const std::size_t k = inst.k, t_f = inst.t_f, n_b = inst.n_b;
  PraFeatures f{k, Tensor({n_b, k, t_f}), Tensor({n_b, k, t_f}), Tensor({k, t_f}), Tensor({n_b, k_max * t_f})};
  for (std::size_t j = 0; j < t_f; ++j)
    for (std::size_t u = 0; u < k; ++u) {
      const double r = inst.r[j * k + u];
      f.rates[u * t_f + j] = r;
      for (std::size_t i = 0; i < n_b; ++i) {
        const double m = inst.m[(i * t_f + j) * k + u];
        f.mask[(i * k + u) * t_f + j] = m;
        f.x[(i * k + u) * t_f + j] = r * m;
        f.padded[i * k_max * t_f + u * t_f + j] = r * m;
      }
    }
  return f;
}

struct PraGroupOutput {
  Var plan;   // [B, K, T_f], normalized
  Var duals;  // [B, N_b, T_f]
  Tensor mask;  // [B, N_b, K, T_f]
};

/// Forward pass for samples that share K.
inline PraGroupOutput pra_forward(Binder& bind, const PraModel& m, const std::vector<const PraFeatures*>& group) {
  using namespace numcore;
  Tape& tape = bind.tape();
  const std::size_t b = group.size(), k = group.front()->k;
  const std::size_t n_b = group.front()->x.dim(0), t_f = m.spec.t_f, k_max = m.spec.k_max;
  std::vector<double> x, mask, rates, padded;
  for (const PraFeatures* f : group) {
    if (f->k != k) throw ContractError("pra_forward: group mixes K");
    x.insert(x.end(), f->x.values().begin(), f->x.values().end());
    mask.insert(mask.end(), f->mask.values().begin(), f->mask.values().end());
    rates.insert(rates.end(), f->rates.values().begin(), f->rates.values().end());
    padded.insert(padded.end(), f->padded.values().begin(), f->padded.values().end());
  }
  Tensor mask_t({b, n_b, k, t_f}, std::move(mask));
  Var raw;
  if (m.spec.kind == PrimalKind::fc) {
    Var out = equinet::fc_apply(bind, m.primal_fc, tape.constant(Tensor({b * n_b, k_max * t_f}, padded)));
    Tensor select({k, k_max});
    for (std::size_t u = 0; u < k; ++u) select(u, u) = 1.0;
    raw = contract(reshape(out, {b * n_b, k_max, t_f}), tape.constant(std::move(select)), 1);
  } else {
    std::optional<Var> beta;
    if (m.spec.kind == PrimalKind::pinn_adp_k) beta = equinet::beta_apply(bind, m.beta, k);
    raw = equinet::pinn1d_apply(bind, m.primal, tape.constant(Tensor({b * n_b, k, t_f}, std::move(x))), beta);
  }
  // the floor keeps a row whose softplus outputs all underflow normalizable
  Var combined = add_scalar(
      reshape(sum_axis(mul(reshape(raw, {b, n_b, k, t_f}), tape.constant(mask_t)), 1), {b, k, t_f}), 1e-12);
  Var r = tape.constant(Tensor({b, k, t_f}, std::move(rates)));
  Var plan = div(combined, broadcast_axis(sum_axis(mul(combined, r), 2), 2, t_f));
  Var duals = reshape(equinet::fc_apply(bind, m.dual, tape.constant(Tensor({b * n_b, k_max * t_f}, std::move(padded)))),
                      {b, n_b, t_f});
  return {plan, duals, std::move(mask_t)};
}

/// Normalized plan [T_f, K] for one instance.
inline Tensor predict_plan(const PraModel& m, const PraInstance& inst) {
  const PraFeatures f = make_features(inst, m.spec.k_max);
  Tape tape;
  Binder bind(tape, false);
  const Tensor& p = pra_forward(bind, m, {&f}).plan.value();
  Tensor out({inst.t_f, inst.k});
  for (std::size_t u = 0; u < inst.k; ++u)
    for (std::size_t j = 0; j < inst.t_f; ++j) out[j * inst.k + u] = p[u * inst.t_f + j];
  return out;
}

struct PraHyper {
  double rho = 10.0;
  std::size_t epochs = 200;
  std::size_t batch_size = 64;
  double lr_primal = 0.01;
  double lr_dual = 0.01;
  std::uint64_t seed = 1;
};

struct PraTrainResult {
  std::vector<double> cost_trace;  // mean batch cost per epoch
  double seconds = 0.0;
};

/// Simultaneous primal-dual training: each batch takes a descent step on the plan network
/// (and beta net) and an ascent step on the dual network, from the same forward pass.
/// `on_epoch(epoch, cost)` may return false to stop early.
inline PraTrainResult train_pra(PraModel& m, const std::vector<PraInstance>& data, const PraHyper& hyper,
                                const std::function<bool(std::size_t, double)>& on_epoch = {}) {
  if (data.empty()) throw ContractError("train_pra: empty dataset");
  if (!(hyper.rho > 0.0)) throw ValidationError("rho", "must be positive");
  if (hyper.batch_size == 0) throw ValidationError("batch_size", "must be positive");
  std::vector<PraFeatures> feats;
  feats.reserve(data.size());
  for (const auto& inst : data) {
    if (has_degenerate_user(inst)) throw DegenerateUserError("train_pra: instance with an all-zero rate row");
    feats.push_back(make_features(inst, m.spec.k_max));
  }
  const auto start = std::chrono::steady_clock::now();
  numcore::AdamState primal_opt, dual_opt;
  primal_opt.learning_rate = hyper.lr_primal;
  dual_opt.learning_rate = hyper.lr_dual;
  const std::vector<Tensor*> primal = primal_tensors(m), dual = dual_tensors(m);
  Rng rng = derive_rng(hyper.seed, 0x70a);
  std::vector<std::size_t> order(feats.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  PraTrainResult res;
  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_cost = 0.0;
    std::size_t batches = 0;
    for (std::size_t lo = 0; lo < order.size(); lo += hyper.batch_size) {
      const std::size_t hi = std::min(order.size(), lo + hyper.batch_size);
      std::map<std::size_t, std::vector<const PraFeatures*>> groups;
      for (std::size_t i = lo; i < hi; ++i) groups[feats[order[i]].k].push_back(&feats[order[i]]);
      Tape tape;
      Binder bind(tape);
      std::optional<Var> total;
      for (auto& [k, group] : groups) {
        PraGroupOutput out = pra_forward(bind, m, group);
        Var c = numcore::scale(pra_cost(out.plan, out.duals, out.mask, hyper.rho),
                               static_cast<double>(group.size()) / static_cast<double>(hi - lo));
        total = total ? numcore::add(*total, c) : c;
      }
      const double cost = total->value().item();
      if (!std::isfinite(cost)) throw NonFiniteError("train_pra: non-finite cost at epoch " + std::to_string(epoch));
      const auto grads = tape.backward(*total);
      std::vector<Tensor> gp, gd;
      for (Tensor* t : primal) gp.push_back(grads[bind(*t)]);
      for (const Tensor& g : gp)
        for (double v : g.values())
          if (!std::isfinite(v)) throw NonFiniteError("train_pra: non-finite gradient at epoch " + std::to_string(epoch));
      for (Tensor* t : dual) {
        Tensor g = grads[bind(*t)];
        for (double& v : g.values()) v = -v;
        gd.push_back(std::move(g));
      }
      numcore::adam_step(primal, gp, primal_opt);
      numcore::adam_step(dual, gd, dual_opt);
      epoch_cost += cost;
      ++batches;
    }
    res.cost_trace.push_back(epoch_cost / static_cast<double>(batches));
    if (on_epoch && !on_epoch(epoch, res.cost_trace.back())) break;
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

struct PraDatasetSpec {
  std::size_t samples = 0;
  double small_fraction = 0.8;  // share drawn with K uniform in [1, small_k_max]
  std::size_t small_k_max = 4;
  std::size_t fixed_k = 0;      // when nonzero, every sample uses this K
  bool require_feasible = false;
};

/// A generated scenario together with the instance the learner and the LP see.
struct PraSample {
  PraScenario scenario;
  PraInstance instance;
};

/// Sample i uses the stream derive_rng(seed, i); degenerate (and optionally LP-infeasible)
/// draws are replaced by further draws from the same stream. The first small_fraction of the
/// samples draw K uniformly from [1, small_k_max], the rest use K_max.
inline std::vector<PraSample> make_pra_samples(const PraConfig& cfg, const PraDatasetSpec& spec, std::uint64_t seed) {
  cfg.validate();
  if (spec.fixed_k > cfg.k_max) throw ValidationError("k", "exceeds K_max");
  std::vector<PraSample> out(spec.samples);
  const auto n_small = static_cast<std::size_t>(std::llround(spec.small_fraction * static_cast<double>(spec.samples)));
  parallel_for(spec.samples, [&](std::size_t i) {
    Rng rng = derive_rng(seed, i);
    std::size_t k = spec.fixed_k > 0 ? spec.fixed_k : cfg.k_max;
    if (spec.fixed_k == 0 && i < n_small)
      k = std::uniform_int_distribution<std::size_t>(1, std::min(spec.small_k_max, cfg.k_max))(rng);
    for (;;) {
      PraScenario s = generate_pra_scenario(cfg, k, rng);
      PraInstance inst = make_instance(s, cfg);
      if (has_degenerate_user(inst)) continue;
      if (spec.require_feasible && lp_solve_p1(inst).status != LpStatus::optimal) continue;
      out[i] = PraSample{std::move(s), std::move(inst)};
      break;
    }
  });
  return out;
}

inline std::vector<PraInstance> make_pra_dataset(const PraConfig& cfg, const PraDatasetSpec& spec, std::uint64_t seed) {
  std::vector<PraInstance> out;
  out.reserve(spec.samples);
  for (auto& s : make_pra_samples(cfg, spec, seed)) out.push_back(std::move(s.instance));
  return out;
}

struct PraEvaluation {
  double mean_objective = 0.0;   // learned plan, mean ||S||_1
  double mean_optimum = 0.0;     // LP optimum
  double relative_loss = 0.0;    // (mean_objective - mean_optimum) / mean_optimum
  double max_overload = 0.0;     // over all instances and BS-frames
  double max_qos_residual = 0.0;
  double mean_edf = 0.0;         // EDF total time, when scenarios are given
  std::size_t instances = 0;
};

inline PraEvaluation evaluate_pra(const PraModel& m, const std::vector<PraInstance>& test) {
  if (test.empty()) throw ContractError("evaluate_pra: empty test set");
  PraEvaluation ev;
  ev.max_overload = -std::numeric_limits<double>::infinity();
  for (const auto& inst : test) {
    const LpResult lp = lp_solve_p1(inst);
    if (lp.status != LpStatus::optimal) throw ContractError("evaluate_pra: test instance is not LP-feasible");
    const PlanReport rep = evaluate_plan(predict_plan(m, inst), inst);
    ev.mean_objective += rep.objective;
    ev.mean_optimum += lp.objective;
    ev.max_overload = std::max(ev.max_overload, rep.max_overload);
    ev.max_qos_residual = std::max(ev.max_qos_residual, rep.qos_residual);
  }
  ev.instances = test.size();
  ev.mean_objective /= static_cast<double>(test.size());
  ev.mean_optimum /= static_cast<double>(test.size());
  ev.relative_loss = (ev.mean_objective - ev.mean_optimum) / ev.mean_optimum;
  return ev;
}

}  // namespace pinn::pra
