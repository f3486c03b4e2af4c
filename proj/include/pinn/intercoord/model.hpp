#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <numeric>

#include "pinn/equinet.hpp"
#include "pinn/intercoord/dataset.hpp"
#include "pinn/numcore/batch_norm.hpp"
#include "pinn/numcore/optim.hpp"

namespace pinn::intercoord {

using equinet::Activation;
using numcore::Binder;
using numcore::Tape;
using numcore::Var;

enum class IcKind { pinn, pinn_adp_k, fc };

inline const char* to_string(IcKind k) {
  switch (k) {
    case IcKind::pinn: return "pinn";
    case IcKind::pinn_adp_k: return "pinn-adp-k";
    case IcKind::fc: return "fc";
  }
  return "pinn-adp-k";
}

inline IcKind ic_kind_from_string(std::string_view s) {
  if (s == "pinn") return IcKind::pinn;
  if (s == "pinn-adp-k") return IcKind::pinn_adp_k;
  if (s == "fc") return IcKind::fc;
  throw ValidationError("model", "unknown model '" + std::string(s) + "'");
}

struct IcNetSpec {
  IcKind kind = IcKind::pinn_adp_k;
  std::size_t k_max = 10;
  std::vector<std::size_t> hidden_blocks{3, 3};  // PINN: square hidden block sizes
  std::vector<std::size_t> fc_hidden{200, 100, 50};
  bool fc_bias = false;
  std::size_t beta_hidden = 10;

  bool is_pinn() const { return kind != IcKind::fc; }

  equinet::Pinn2dSpec pinn_spec() const {
    equinet::Pinn2dSpec s{{{1, 1}}, {}};
    for (auto h : hidden_blocks) {
      s.dims.push_back({h, h});
      s.activations.push_back(Activation::softplus);
    }
    s.dims.push_back({1, 1});
    s.activations.push_back(Activation::identity);
    return s;
  }

  equinet::FcSpec fc_spec() const {
    equinet::FcSpec s{{k_max * k_max}, {}, fc_bias};
    for (auto h : fc_hidden) {
      s.widths.push_back(h);
      s.activations.push_back(Activation::softplus);
    }
    s.widths.push_back(k_max);
    s.activations.push_back(Activation::identity);
    return s;
  }
};

/// Power-control network; the output head is batch normalization followed by a sigmoid.
/// PINN variants normalize one pooled feature (every block output shares statistics, which
/// keeps the map equivariant); the FC baseline normalizes each of its K_max outputs.
struct IcModel {
  IcNetSpec spec;
  equinet::Pinn2dParams pinn;
  equinet::BetaNetParams beta;
  equinet::FcParams fc;
  numcore::BatchNormState bn;
};

inline IcModel build_ic_model(const IcNetSpec& spec, Rng& rng, equinet::Init init = equinet::Init::glorot_uniform) {
  if (spec.k_max == 0) throw ContractError("ic model: K_max must be positive");
  IcModel m;
  m.spec = spec;
  if (spec.is_pinn()) {
    m.pinn = equinet::build_pinn2d(spec.pinn_spec(), init, rng);
    m.beta = equinet::build_beta(equinet::BetaSpec{spec.beta_hidden}, init, rng);
    m.bn = numcore::BatchNormState::make(1);
  } else {
    m.fc = equinet::build_fc(spec.fc_spec(), init, rng);
    m.bn = numcore::BatchNormState::make(spec.k_max);
  }
  return m;
}

inline std::size_t count_params(const IcModel& m) {
  if (!m.spec.is_pinn()) return equinet::count_params(m.fc);
  return equinet::count_params(m.pinn) + (m.spec.kind == IcKind::pinn_adp_k ? equinet::count_params(m.beta) : 0);
}

inline std::vector<Tensor*> trainable_tensors(IcModel& m) {
  std::vector<Tensor*> out;
  if (m.spec.is_pinn()) {
    for (auto& [n, t] : equinet::named_tensors(m.pinn)) out.push_back(t);
    if (m.spec.kind == IcKind::pinn_adp_k)
      for (auto& [n, t] : equinet::named_tensors(m.beta)) out.push_back(t);
  } else {
    for (auto& [n, t] : equinet::named_tensors(m.fc)) out.push_back(t);
  }
  out.push_back(&m.bn.scale);
  out.push_back(&m.bn.shift);
  return out;
}

struct IcBatchOutput {
  Var pred;       // PINN: [N_blocks, 1]; FC: [N, K_max]
  Tensor target;  // same shape as pred, zero where masked
  Tensor mask;    // same shape, 1 on real outputs
  std::vector<std::size_t> order;  // sample index of each PINN group row block, in output order
  std::size_t valid = 0;
};

/// Forward pass on a batch. PINN samples are grouped by K (one beta per group); the groups'
/// raw outputs are concatenated before the shared batch-norm head.
inline IcBatchOutput ic_forward(Binder& bind, IcModel& m, const std::vector<const IcSample*>& batch, bool training) {
  using namespace numcore;
  Tape& tape = bind.tape();
  IcBatchOutput out;
  if (batch.empty()) throw ContractError("ic_forward: empty batch");
  if (m.spec.is_pinn()) {
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < batch.size(); ++i) groups[batch[i]->k].push_back(i);
    std::vector<Var> parts;
    std::vector<double> target;
    for (auto& [k, idx] : groups) {
      std::vector<double> x;
      for (auto i : idx) {
        x.insert(x.end(), batch[i]->x.values().begin(), batch[i]->x.values().end());
        target.insert(target.end(), batch[i]->y.values().begin(), batch[i]->y.values().end());
        out.order.push_back(i);
      }
      std::optional<Var> beta;
      if (m.spec.kind == IcKind::pinn_adp_k) beta = equinet::beta_apply(bind, m.beta, k);
      Var raw = equinet::pinn2d_apply(bind, m.pinn, tape.constant(Tensor({idx.size(), k, k, 1, 1}, std::move(x))), beta);
      parts.push_back(reshape(raw, {idx.size() * k, 1}));
    }
    Var raw = parts.size() == 1 ? parts.front() : concat0(parts);
    out.valid = raw.shape()[0];
    out.pred = sigmoid(batch_norm(bind, raw, m.bn, training));
    out.target = Tensor({out.valid, 1}, std::move(target));
    out.mask = Tensor::filled({out.valid, 1}, 1.0);
    return out;
  }
  const std::size_t n = batch.size(), km = m.spec.k_max;
  Tensor x({n, km * km}), target({n, km}), mask({n, km});
  for (std::size_t i = 0; i < n; ++i) {
    const IcSample& s = *batch[i];
    if (s.k > km) throw ContractError("ic_forward: sample K exceeds K_max");
    for (std::size_t r = 0; r < s.k; ++r) {
      for (std::size_t c = 0; c < s.k; ++c) x[i * km * km + r * km + c] = s.x(r, c);
      target[i * km + r] = s.y[r];
      mask[i * km + r] = 1.0;
    }
    out.order.push_back(i);
    out.valid += s.k;
  }
  out.pred = sigmoid(batch_norm(bind, equinet::fc_apply(bind, m.fc, tape.constant(std::move(x))), m.bn, training));
  out.target = std::move(target);
  out.mask = std::move(mask);
  return out;
}

/// Mean squared error over real (unpadded) outputs.
inline Var ic_mse(const IcBatchOutput& o) {
  using namespace numcore;
  Tape& tape = *o.pred.tape;
  Var diff = sub(mul(o.pred, tape.constant(o.mask)), tape.constant(o.target));
  return scale(sum(square(diff)), 1.0 / static_cast<double>(o.valid));
}

/// Normalized powers for each sample (inference mode).
inline std::vector<Tensor> ic_predict(IcModel& m, const std::vector<IcSample>& samples) {
  std::vector<Tensor> out(samples.size());
  if (samples.empty()) return out;
  std::vector<const IcSample*> ptrs;
  for (const auto& s : samples) ptrs.push_back(&s);
  Tape tape;
  Binder bind(tape, false);
  IcBatchOutput o = ic_forward(bind, m, ptrs, false);
  const Tensor& p = o.pred.value();
  if (m.spec.is_pinn()) {
    std::size_t row = 0;
    for (auto i : o.order) {
      out[i] = Tensor({samples[i].k}, std::vector<double>(p.data() + row, p.data() + row + samples[i].k));
      row += samples[i].k;
    }
  } else {
    const std::size_t km = m.spec.k_max;
    for (std::size_t i = 0; i < samples.size(); ++i)
      out[i] = Tensor({samples[i].k}, std::vector<double>(p.data() + i * km, p.data() + i * km + samples[i].k));
  }
  return out;
}

struct IcHyper {
  std::size_t epochs = 40;
  std::size_t batch_size = 64;
  double learning_rate = 0.01;
  std::uint64_t seed = 1;
};

struct IcTrainResult {
  std::vector<double> loss_trace;  // mean training MSE per epoch
  std::vector<std::string> warnings;
  double seconds = 0.0;
  std::size_t epochs_run = 0;
};

/// Supervised MSE training with RMSprop. PINN models skip augmented samples (relabeled copies
/// add nothing to an equivariant map). `on_epoch(epoch, loss)` may return false to stop early.
inline IcTrainResult train_ic_supervised(IcModel& m, const std::vector<IcSample>& data, const IcHyper& hyper,
                                         const std::function<bool(std::size_t, double)>& on_epoch = {}) {
  IcTrainResult res;
  std::vector<const IcSample*> pool;
  std::size_t skipped = 0;
  for (const auto& s : data) {
    if (m.spec.is_pinn() && s.augmented) {
      ++skipped;
      continue;
    }
    pool.push_back(&s);
  }
  if (skipped > 0) res.warnings.push_back("skipped " + std::to_string(skipped) + " augmented samples for a PINN model");
  if (pool.empty()) throw ContractError("train_ic_supervised: empty dataset");
  if (hyper.batch_size < 2) throw ValidationError("batch_size", "batch normalization needs at least 2 samples");
  const auto start = std::chrono::steady_clock::now();
  numcore::RmspropState opt;
  opt.learning_rate = hyper.learning_rate;
  const std::vector<Tensor*> params = trainable_tensors(m);
  Rng rng = derive_rng(hyper.seed, 0x1c);
  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    std::shuffle(pool.begin(), pool.end(), rng);
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t lo = 0; lo < pool.size(); lo += hyper.batch_size) {
      std::size_t hi = std::min(pool.size(), lo + hyper.batch_size);
      if (hi - lo < 2) break;  // a trailing single sample cannot be batch-normalized
      std::vector<const IcSample*> batch(pool.begin() + static_cast<std::ptrdiff_t>(lo), pool.begin() + static_cast<std::ptrdiff_t>(hi));
      Tape tape;
      Binder bind(tape);
      Var loss = ic_mse(ic_forward(bind, m, batch, true));
      const double l = loss.value().item();
      if (!std::isfinite(l)) throw NonFiniteError("train_ic_supervised: non-finite loss at epoch " + std::to_string(epoch));
      const auto grads = tape.backward(loss);
      std::vector<Tensor> g;
      for (Tensor* t : params) g.push_back(grads[bind(*t)]);
      numcore::rmsprop_step(params, g, opt);
      total += l;
      ++batches;
    }
    res.loss_trace.push_back(batches ? total / static_cast<double>(batches) : 0.0);
    res.epochs_run = epoch + 1;
    if (on_epoch && !on_epoch(epoch, res.loss_trace.back())) break;
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

struct IcEvaluation {
  double ratio = 0.0;         // mean(net sum-rate) / mean(WMMSE sum-rate)
  double median_ratio = 0.0;  // per-sample ratio median
  double mse = 0.0;
  double mean_rate = 0.0;
  double mean_label_rate = 0.0;
  std::size_t samples = 0;
};

inline IcEvaluation evaluate_powers(const std::vector<IcSample>& test, const std::vector<Tensor>& powers, const WmmseConfig& cfg) {
  if (test.empty()) throw ContractError("evaluate_ic: empty test set");
  if (powers.size() != test.size()) throw ShapeError("evaluate_ic: one power vector per sample required");
  IcEvaluation ev;
  std::vector<double> ratios;
  std::size_t entries = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const double net = sum_rate(test[i].x, powers[i], cfg.p_max, cfg.noise_power, cfg.log2);
    const double ref = sum_rate(test[i].x, test[i].y, cfg.p_max, cfg.noise_power, cfg.log2);
    ev.mean_rate += net;
    ev.mean_label_rate += ref;
    ratios.push_back(ref > 0.0 ? net / ref : 1.0);
    for (std::size_t j = 0; j < test[i].k; ++j) ev.mse += (powers[i][j] - test[i].y[j]) * (powers[i][j] - test[i].y[j]);
    entries += test[i].k;
  }
  ev.samples = test.size();
  ev.mean_rate /= static_cast<double>(test.size());
  ev.mean_label_rate /= static_cast<double>(test.size());
  ev.ratio = ev.mean_label_rate > 0.0 ? ev.mean_rate / ev.mean_label_rate : 1.0;
  ev.mse /= static_cast<double>(entries);
  std::sort(ratios.begin(), ratios.end());
  const std::size_t n = ratios.size();
  ev.median_ratio = n % 2 ? ratios[n / 2] : 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]);
  return ev;
}

inline IcEvaluation evaluate_ic(IcModel& m, const std::vector<IcSample>& test, const WmmseConfig& cfg) {
  if (test.empty()) throw ContractError("evaluate_ic: empty test set");
  return evaluate_powers(test, ic_predict(m, test), cfg);
}

}  // namespace pinn::intercoord
