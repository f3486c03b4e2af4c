#pragma once

#include "pinn/equinet.hpp"
#include "pinn/intercoord/model.hpp"
#include "pinn/numcore/gradcheck.hpp"
#include "pinn/pra/plan.hpp"

namespace pinn::benchcli {

using numcore::Tensor;

struct GradcheckRow {
  std::string component;
  std::size_t cases = 0;
  double max_relative_error = 0.0;
  bool passed = false;
};

namespace detail {

using numcore::Binder;
using numcore::Tape;
using numcore::Var;

inline Tensor gaussian(numcore::Shape shape, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = n(rng);
  return t;
}

/// Backprop vs central differences for every tensor in `targets`, with `loss` rebuilt on a
/// fresh tape per probe. Returns the worst relative error.
inline double compare(const std::function<Var(Tape&, Binder&)>& loss, const std::vector<Tensor*>& targets, double h) {
  Tape tape;
  Binder bind(tape);
  const Var l = loss(tape, bind);
  const auto grads = tape.backward(l);
  std::vector<Tensor> analytic;
  for (Tensor* t : targets) analytic.push_back(grads[bind(*t)]);
  double worst = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    Tensor* t = targets[i];
    const Tensor saved = *t;
    const Tensor numeric = numcore::finite_diff_grad(
        [&](const Tensor& v) {
          *t = v;
          Tape tp;
          Binder b(tp, false);
          return loss(tp, b).value().item();
        },
        saved, h);
    *t = saved;
    worst = std::max(worst, numcore::relative_error(analytic[i], numeric));
  }
  return worst;
}

/// Weighted sum of an output, so every output coordinate carries a distinct adjoint.
inline Var probe(Tape& tape, Var y, const Tensor& w) { return numcore::sum(numcore::mul(y, tape.constant(w))); }

template <class Named>
std::vector<Tensor*> pointers(Named named) {
  std::vector<Tensor*> out;
  for (auto& [n, t] : named) out.push_back(t);
  return out;
}

}  // namespace detail

/// Finite-difference suite over the differentiable building blocks: `cases` random
/// draws each (K >= 2 so that every weight reaches the output).
inline std::vector<GradcheckRow> run_gradcheck_suite(std::size_t cases, double tolerance, std::uint64_t seed) {
  using namespace detail;
  using equinet::Activation;
  constexpr double h = 1e-6;
  const Activation acts[] = {Activation::softplus, Activation::sigmoid, Activation::identity};
  std::vector<GradcheckRow> rows;
  auto run = [&](const std::string& name, const std::function<double(Rng&, std::size_t)>& one) {
    GradcheckRow row{name, cases, 0.0, true};
    for (std::size_t c = 0; c < cases; ++c) {
      Rng rng = derive_rng(seed, std::hash<std::string>{}(name) ^ c);
      row.max_relative_error = std::max(row.max_relative_error, one(rng, c));
    }
    row.passed = row.max_relative_error < tolerance;
    rows.push_back(row);
  };

  run("pinn1d", [&](Rng& rng, std::size_t c) {
    const std::size_t k = 2 + c % 4;
    equinet::Pinn1dSpec spec{{2 + c % 2, 3, 2}, {acts[c % 3], acts[(c + 1) % 3]}, c % 2 == 0};
    auto p = equinet::build_pinn1d(spec, equinet::Init::glorot_uniform, rng);
    Tensor x = gaussian({2, k, spec.widths[0]}, rng), w = gaussian({2, k, 2}, rng);
    auto targets = pointers(equinet::named_tensors(p));
    targets.push_back(&x);
    return compare([&](Tape& t, Binder& b) { return probe(t, equinet::pinn1d_apply(b, p, b(x)), w); }, targets, h);
  });

  run("pinn2d", [&](Rng& rng, std::size_t c) {
    const std::size_t k = 2 + c % 3;
    equinet::Pinn2dSpec spec{{{1, 1 + c % 2}, {2, 2}, {1, 1}}, {acts[c % 3], c % 2 ? Activation::softplus : Activation::identity}};
    // a saturated sigmoid output leaves gradients below finite-difference resolution
    auto p = equinet::build_pinn2d(spec, equinet::Init::glorot_uniform, rng);
    Tensor x = gaussian({2, k, k, 1, 1 + c % 2}, rng), w = gaussian({2, k, 1}, rng);
    auto targets = pointers(equinet::named_tensors(p));
    targets.push_back(&x);
    return compare([&](Tape& t, Binder& b) { return probe(t, equinet::pinn2d_apply(b, p, b(x)), w); }, targets, h);
  });

  run("beta", [&](Rng& rng, std::size_t c) {
    const std::size_t k = 2 + c % 6;
    auto bp = equinet::build_beta(equinet::BetaSpec{4 + c % 7, acts[c % 3], Activation::softplus, c % 2 == 1},
                                  equinet::Init::glorot_uniform, rng);
    auto p = equinet::build_pinn2d({{{1, 1}, {2, 2}, {1, 1}}, {Activation::softplus, Activation::identity}},
                                   equinet::Init::glorot_uniform, rng);
    Tensor x = gaussian({1, k, k, 1, 1}, rng), w = gaussian({1, k, 1}, rng);
    return compare(
        [&](Tape& t, Binder& b) {
          return probe(t, equinet::pinn2d_apply(b, p, t.constant(x), equinet::beta_apply(b, bp, k)), w);
        },
        pointers(equinet::named_tensors(bp)), h);
  });

  run("fc", [&](Rng& rng, std::size_t c) {
    equinet::FcSpec spec{{3 + c % 3, 5, 4, 2}, {acts[c % 3], acts[(c + 1) % 3], acts[(c + 2) % 3]}, c % 2 == 0};
    auto p = equinet::build_fc(spec, equinet::Init::glorot_uniform, rng);
    Tensor x = gaussian({3, spec.widths[0]}, rng), w = gaussian({3, 2}, rng);
    auto targets = pointers(equinet::named_tensors(p));
    targets.push_back(&x);
    return compare([&](Tape& t, Binder& b) { return probe(t, equinet::fc_apply(b, p, b(x)), w); }, targets, h);
  });

  run("pra_cost", [&](Rng& rng, std::size_t c) {
    const std::size_t b = 2, k = 1 + c % 4, t_f = 2 + c % 3, n_b = 1 + c % 3;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Tensor plan({b, k, t_f}), duals({b, n_b, t_f}), mask({b, n_b, k, t_f});
    for (double& v : plan.values()) v = u(rng);
    for (double& v : duals.values()) v = u(rng);
    std::uniform_int_distribution<std::size_t> bs(0, n_b - 1);
    for (std::size_t s = 0; s < b; ++s)
      for (std::size_t q = 0; q < k; ++q)
        for (std::size_t j = 0; j < t_f; ++j) mask[((s * n_b + bs(rng)) * k + q) * t_f + j] = 1.0;
    const double rho = 1.0 + 10.0 * u(rng);
    return compare([&](Tape&, Binder& bd) { return pra::pra_cost(bd(plan), bd(duals), mask, rho); }, {&plan, &duals}, h);
  });

  run("mse_loss", [&](Rng& rng, std::size_t c) {
    intercoord::IcNetSpec spec;
    spec.kind = c % 2 ? intercoord::IcKind::pinn_adp_k : intercoord::IcKind::fc;
    spec.k_max = 4;
    spec.hidden_blocks = {2};
    spec.fc_hidden = {6};
    intercoord::IcModel m = intercoord::build_ic_model(spec, rng);
    std::vector<intercoord::IcSample> samples;
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (std::size_t i = 0; i < 4; ++i) {
      const std::size_t k = 2 + (i + c) % 3;
      intercoord::IcSample s{k, intercoord::generate_channels(k, rng), Tensor({k}), false};
      for (double& v : s.y.values()) v = u(rng);
      samples.push_back(std::move(s));
    }
    std::vector<const intercoord::IcSample*> batch;
    for (const auto& s : samples) batch.push_back(&s);
    const auto targets = intercoord::trainable_tensors(m);
    return compare([&](Tape&, Binder& b) { return intercoord::ic_mse(intercoord::ic_forward(b, m, batch, true)); }, targets, h);
  });
  return rows;
}

}  // namespace pinn::benchcli
