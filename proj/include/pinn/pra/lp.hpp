#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "pinn/pra/scenario.hpp"

namespace pinn::pra {

/// min c^T x  s.t.  A x = b, x >= 0.
struct StandardLp {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
};

enum class LpStatus { optimal, infeasible, iteration_limit };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

struct IpmOptions {
  int max_iterations = 200;
  double tolerance = 1e-11;
};

struct IpmResult {
  LpStatus status = LpStatus::iteration_limit;
  Eigen::VectorXd x, y, z;
  int iterations = 0;
  double primal_residual = 0.0;  // max |A x - b|
  double dual_residual = 0.0;    // max |A^T y + z - c|
  double gap = 0.0;              // |c^T x - b^T y|
};

namespace detail {

inline double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
  return alpha;
}

}  // namespace detail

/// Mehrotra predictor-corrector primal-dual interior point on dense normal equations.
/// Requires A to have full row rank.
inline IpmResult solve_standard_lp(const StandardLp& lp, const IpmOptions& opt = {}) {
  using Eigen::VectorXd;
  const Eigen::MatrixXd& a = lp.a;
  const Eigen::Index m = a.rows(), n = a.cols();
  if (lp.b.size() != m || lp.c.size() != n) throw ShapeError("lp: dimension mismatch");

  // Mehrotra's starting point.
  Eigen::LDLT<Eigen::MatrixXd> aat(a * a.transpose());
  VectorXd x = a.transpose() * aat.solve(lp.b);
  VectorXd y = aat.solve(a * lp.c);
  VectorXd z = lp.c - a.transpose() * y;
  x.array() += std::max(-1.5 * x.minCoeff(), 0.0);
  z.array() += std::max(-1.5 * z.minCoeff(), 0.0);
  if (x.sum() <= 0.0) x.setOnes();
  if (z.sum() <= 0.0) z.setOnes();
  const double xz = x.dot(z);
  x.array() += 0.5 * xz / z.sum();
  z.array() += 0.5 * xz / x.sum();

  const double bnorm = lp.b.lpNorm<Eigen::Infinity>(), cnorm = lp.c.lpNorm<Eigen::Infinity>();
  IpmResult res;
  for (int it = 0;; ++it) {
    const VectorXd rp = lp.b - a * x;
    const VectorXd rd = lp.c - a.transpose() * y - z;
    const double pobj = lp.c.dot(x), dobj = lp.b.dot(y);
    res.primal_residual = rp.lpNorm<Eigen::Infinity>();
    res.dual_residual = rd.lpNorm<Eigen::Infinity>();
    res.gap = std::abs(pobj - dobj);
    res.iterations = it;
    if (res.primal_residual <= opt.tolerance * (1.0 + bnorm) && res.dual_residual <= opt.tolerance * (1.0 + cnorm) &&
        res.gap <= opt.tolerance * (1.0 + std::abs(pobj))) {
      res.status = LpStatus::optimal;
      break;
    }
    if (it >= opt.max_iterations || !x.allFinite() || !y.allFinite()) {
      res.status = LpStatus::iteration_limit;
      break;
    }
    const double mu = x.dot(z) / static_cast<double>(n);
    const VectorXd d = x.cwiseQuotient(z);
    Eigen::LDLT<Eigen::MatrixXd> normal(a * d.asDiagonal() * a.transpose());

    // Solves the Newton system for a complementarity right-hand side rc.
    auto direction = [&](const VectorXd& rc, VectorXd& dx, VectorXd& dy, VectorXd& dz) {
      const VectorXd t = (rc - x.cwiseProduct(rd)).cwiseQuotient(z);
      dy = normal.solve(rp - a * t);
      dz = rd - a.transpose() * dy;
      dx = t + d.cwiseProduct(a.transpose() * dy);
    };

    VectorXd dx, dy, dz;
    direction(-x.cwiseProduct(z), dx, dy, dz);
    const double ap_aff = detail::max_step(x, dx), ad_aff = detail::max_step(z, dz);
    const double mu_aff = (x + ap_aff * dx).dot(z + ad_aff * dz) / static_cast<double>(n);
    const double sigma = std::pow(mu_aff / mu, 3.0);

    VectorXd rc = -x.cwiseProduct(z) - dx.cwiseProduct(dz);
    rc.array() += sigma * mu;
    direction(rc, dx, dy, dz);
    const double ap = std::min(1.0, 0.995 * detail::max_step(x, dx));
    const double ad = std::min(1.0, 0.995 * detail::max_step(z, dz));
    x += ap * dx;
    y += ad * dy;
    z += ad * dz;
  }
  res.x = x;
  res.y = y;
  res.z = z;
  return res;
}

struct LpResult {
  LpStatus status = LpStatus::iteration_limit;
  Tensor plan;       // [T_f, K]
  double objective = 0.0;
  Tensor dual_qos;   // [K]
  Tensor dual_load;  // [N_b, T_f], non-positive multipliers of the <= rows
  Tensor certificate;  // Farkas ray y (K + N_b T_f) when infeasible: b^T y > 0, A^T y <= 0
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  int iterations = 0;
};

/// P1 in standard form: variables [s (T_f K, index j K + k); slack (N_b T_f)].
inline StandardLp p1_standard_form(const PraInstance& inst) {
  validate_instance(inst);
  const std::size_t k = inst.k, t_f = inst.t_f, n_b = inst.n_b;
  const auto ns = static_cast<Eigen::Index>(t_f * k), nl = static_cast<Eigen::Index>(n_b * t_f);
  StandardLp lp{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k) + nl, ns + nl),
                Eigen::VectorXd::Ones(static_cast<Eigen::Index>(k) + nl), Eigen::VectorXd::Zero(ns + nl)};
  lp.c.head(ns).setOnes();
  for (std::size_t j = 0; j < t_f; ++j)
    for (std::size_t u = 0; u < k; ++u) {
      const auto col = static_cast<Eigen::Index>(j * k + u);
      lp.a(static_cast<Eigen::Index>(u), col) = inst.r[j * k + u];
      for (std::size_t i = 0; i < n_b; ++i)
        if (inst.m[(i * t_f + j) * k + u] != 0.0) lp.a(static_cast<Eigen::Index>(k + i * t_f + j), col) = 1.0;
    }
  for (Eigen::Index l = 0; l < nl; ++l) lp.a(static_cast<Eigen::Index>(k) + l, ns + l) = 1.0;
  return lp;
}

/// min ||S||_1 s.t. sum_j s_k^j r_k^j = 1, per-BS-frame load <= 1, S >= 0.
/// Feasibility is settled first by a phase-1 LP whose dual supplies the certificate.
inline LpResult lp_solve_p1(const PraInstance& inst, const IpmOptions& opt = {}) {
  const StandardLp lp = p1_standard_form(inst);
  const Eigen::Index m = lp.a.rows(), n = lp.a.cols();
  const std::size_t k = inst.k, t_f = inst.t_f, n_b = inst.n_b;
  LpResult out;

  for (std::size_t u = 0; u < k; ++u) {
    if (lp.a.row(static_cast<Eigen::Index>(u)).lpNorm<Eigen::Infinity>() == 0.0) {
      out.status = LpStatus::infeasible;
      out.certificate = Tensor({static_cast<std::size_t>(m)});
      out.certificate[u] = 1.0;
      return out;
    }
  }

  // Phase 1: min 1^T art s.t. A x + art = b (b >= 0 here).
  StandardLp ph1{Eigen::MatrixXd::Zero(m, n + m), lp.b, Eigen::VectorXd::Zero(n + m)};
  ph1.a.leftCols(n) = lp.a;
  ph1.a.rightCols(m).setIdentity();
  ph1.c.tail(m).setOnes();
  const IpmResult p1 = solve_standard_lp(ph1, opt);
  if (p1.status == LpStatus::optimal && p1.x.tail(m).sum() > 1e-7) {
    out.status = LpStatus::infeasible;
    out.certificate = Tensor({static_cast<std::size_t>(m)});
    for (Eigen::Index i = 0; i < m; ++i) out.certificate[static_cast<std::size_t>(i)] = p1.y[i];
    out.iterations = p1.iterations;
    return out;
  }

  const IpmResult r = solve_standard_lp(lp, opt);
  out.status = r.status;
  out.iterations = p1.iterations + r.iterations;
  out.primal_residual = r.primal_residual;
  out.dual_residual = r.dual_residual;
  out.gap = r.gap;
  out.plan = Tensor({t_f, k});
  for (std::size_t i = 0; i < t_f * k; ++i) out.plan[i] = r.x[static_cast<Eigen::Index>(i)];
  out.objective = r.x.head(static_cast<Eigen::Index>(t_f * k)).sum();
  out.dual_qos = Tensor({k});
  for (std::size_t u = 0; u < k; ++u) out.dual_qos[u] = r.y[static_cast<Eigen::Index>(u)];
  out.dual_load = Tensor({n_b, t_f});
  for (std::size_t l = 0; l < n_b * t_f; ++l) out.dual_load[l] = r.y[static_cast<Eigen::Index>(k + l)];
  return out;
}

}  // namespace pinn::pra
