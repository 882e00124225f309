// Copyright 2026 The stplan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STPLAN_QP_SOLVER_HPP_
#define STPLAN_QP_SOLVER_HPP_

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "stplan/qp_problem.hpp"

namespace stplan {

/// Operator-splitting solver settings. Defaults converge well on the
/// corridor QPs of this library; the problems are small enough that a
/// dense factorization is the fastest option.
struct SolverConfig {
  double eps_abs = 1e-6;
  double eps_rel = 1e-6;
  int max_iter = 20000;
  double rho = 0.1;      // base penalty, equality rows get 1e3x
  bool polish = true;    // active-set refinement of the converged iterate
  bool adaptive_rho = true;
  double sigma = 1e-6;   // proximal regularization
  double alpha = 1.6;    // over-relaxation
  double eps_infeasible = 1e-7;
  int check_interval = 10;
  int rho_interval = 25;
  bool record_objective_trace = false;
};

enum class SolveStatus { kSolved, kMaxIter, kPrimalInfeasible };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kSolved: return "solved";
    case SolveStatus::kMaxIter: return "max_iter";
    case SolveStatus::kPrimalInfeasible: return "primal_infeasible";
  }
  return "unknown";
}

struct Solution {
  Eigen::VectorXd x;
  Eigen::VectorXd dual;  // multipliers of the stacked [eq; ie] rows
  double objective = std::numeric_limits<double>::quiet_NaN();
  SolveStatus status = SolveStatus::kMaxIter;
  int iterations = 0;
  double primal_residual = std::numeric_limits<double>::infinity();
  double dual_residual = std::numeric_limits<double>::infinity();
  bool polished = false;
  std::vector<double> objective_trace;  // per iteration, when recorded
};

/// Independent recomputation of the first-order optimality residuals.
struct KKTReport {
  bool has_solution = false;
  double eq_residual = 0.0;
  double ie_violation = 0.0;
  double stationarity = 0.0;
  double complementarity = 0.0;
  std::vector<int> flagged_rows;  // stacked [eq; ie] indices past 10*eps
  bool ok() const { return has_solution && flagged_rows.empty(); }
};

namespace detail {

struct StackedProblem {
  Eigen::MatrixXd A;
  Eigen::VectorXd l;
  Eigen::VectorXd u;
  int m_eq = 0;
};

inline StackedProblem stack_constraints(const QPProblem& qp) {
  StackedProblem s;
  s.m_eq = static_cast<int>(qp.A_eq.rows());
  const int m = s.m_eq + static_cast<int>(qp.A_ie.rows());
  s.A.resize(m, qp.dim);
  s.l.resize(m);
  s.u.resize(m);
  if (s.m_eq > 0) {
    s.A.topRows(s.m_eq) = qp.A_eq;
    s.l.head(s.m_eq) = qp.b_eq;
    s.u.head(s.m_eq) = qp.b_eq;
  }
  if (qp.A_ie.rows() > 0) {
    s.A.bottomRows(qp.A_ie.rows()) = qp.A_ie;
    s.l.tail(qp.A_ie.rows()) = qp.ie_lower;
    s.u.tail(qp.A_ie.rows()) = qp.ie_upper;
  }
  return s;
}

/// Primal infeasibility certificate test on a dual direction delta_y.
inline bool is_primal_infeasibility_certificate(const Eigen::MatrixXd& A,
                                                const Eigen::VectorXd& l,
                                                const Eigen::VectorXd& u,
                                                const Eigen::VectorXd& delta_y,
                                                double eps) {
  const double norm = delta_y.lpNorm<Eigen::Infinity>();
  if (!(norm > 1e-12)) return false;
  const Eigen::VectorXd d = delta_y / norm;
  if ((A.transpose() * d).lpNorm<Eigen::Infinity>() > eps) return false;
  double support = 0.0;
  for (int i = 0; i < d.size(); ++i) {
    if (d(i) > 0.0) {
      if (!std::isfinite(u(i))) {
        if (d(i) > eps) return false;
        continue;
      }
      support += u(i) * d(i);
    } else if (d(i) < 0.0) {
      if (!std::isfinite(l(i))) {
        if (d(i) < -eps) return false;
        continue;
      }
      support += l(i) * d(i);
    }
  }
  return support <= -eps;
}

}  // namespace detail

/// ADMM solve of min x'Qx + q'x + const s.t. A_eq x = b_eq,
/// ie_lower <= A_ie x <= ie_upper. Deterministic for identical inputs
/// and configuration. PrimalInfeasible is certified via the dual
/// divergence direction; MaxIter returns the best iterate found.
inline Solution solve(const QPProblem& qp, const SolverConfig& cfg = {}) {
  const int n = qp.dim;
  const Eigen::MatrixXd P = 2.0 * qp.Q;
  const detail::StackedProblem sc = detail::stack_constraints(qp);
  const int m = static_cast<int>(sc.A.rows());

  Solution sol;
  if (m == 0) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(
        P + cfg.sigma * Eigen::MatrixXd::Identity(n, n));
    sol.x = ldlt.solve(-qp.q);
    sol.dual.resize(0);
    sol.status = SolveStatus::kSolved;
    sol.objective = qp.objective_value(sol.x);
    sol.primal_residual = 0.0;
    sol.dual_residual = (P * sol.x + qp.q).lpNorm<Eigen::Infinity>();
    return sol;
  }

  const auto rho_vector = [&](double base) {
    Eigen::VectorXd r(m);
    for (int i = 0; i < m; ++i) {
      r(i) = (i < sc.m_eq) ? 1e3 * base : base;
    }
    return r;
  };
  double rho_base = cfg.rho;
  Eigen::VectorXd rho = rho_vector(rho_base);

  Eigen::LDLT<Eigen::MatrixXd> kkt;
  const auto factorize = [&]() {
    Eigen::MatrixXd k =
        P + cfg.sigma * Eigen::MatrixXd::Identity(n, n) +
        sc.A.transpose() * rho.asDiagonal() * sc.A;
    kkt.compute(k);
  };
  factorize();

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd y_prev_check = y;

  double r_prim = std::numeric_limits<double>::infinity();
  double r_dual = std::numeric_limits<double>::infinity();
  int iter = 0;
  SolveStatus status = SolveStatus::kMaxIter;

  for (iter = 1; iter <= cfg.max_iter; ++iter) {
    const Eigen::VectorXd rhs =
        cfg.sigma * x - qp.q + sc.A.transpose() * (rho.cwiseProduct(z) - y);
    const Eigen::VectorXd x_tilde = kkt.solve(rhs);
    const Eigen::VectorXd z_tilde = sc.A * x_tilde;

    x = cfg.alpha * x_tilde + (1.0 - cfg.alpha) * x;
    const Eigen::VectorXd z_pre = cfg.alpha * z_tilde + (1.0 - cfg.alpha) * z;
    Eigen::VectorXd z_next = z_pre + y.cwiseQuotient(rho);
    z_next = z_next.cwiseMax(sc.l).cwiseMin(sc.u);
    y += rho.cwiseProduct(z_pre - z_next);
    z = z_next;

    if (cfg.record_objective_trace) {
      sol.objective_trace.push_back(qp.objective_value(x));
    }

    if (iter % cfg.check_interval == 0 || iter == cfg.max_iter) {
      const Eigen::VectorXd ax = sc.A * x;
      const Eigen::VectorXd px = P * x;
      const Eigen::VectorXd aty = sc.A.transpose() * y;
      r_prim = (ax - z).lpNorm<Eigen::Infinity>();
      r_dual = (px + qp.q + aty).lpNorm<Eigen::Infinity>();
      const double eps_prim =
          cfg.eps_abs + cfg.eps_rel * std::max(ax.lpNorm<Eigen::Infinity>(),
                                               z.lpNorm<Eigen::Infinity>());
      const double eps_dual =
          cfg.eps_abs +
          cfg.eps_rel * std::max({px.lpNorm<Eigen::Infinity>(),
                                  qp.q.lpNorm<Eigen::Infinity>(),
                                  aty.lpNorm<Eigen::Infinity>()});
      if (r_prim <= eps_prim && r_dual <= eps_dual) {
        status = SolveStatus::kSolved;
        break;
      }
      const Eigen::VectorXd delta_y = y - y_prev_check;
      if (detail::is_primal_infeasibility_certificate(sc.A, sc.l, sc.u,
                                                      delta_y,
                                                      cfg.eps_infeasible)) {
        status = SolveStatus::kPrimalInfeasible;
        break;
      }
      y_prev_check = y;
    }

    if (cfg.adaptive_rho && iter % cfg.rho_interval == 0 &&
        std::isfinite(r_prim) && std::isfinite(r_dual)) {
      const Eigen::VectorXd ax = sc.A * x;
      const Eigen::VectorXd px = P * x;
      const Eigen::VectorXd aty = sc.A.transpose() * y;
      const double p_scale = std::max(
          {ax.lpNorm<Eigen::Infinity>(), z.lpNorm<Eigen::Infinity>(), 1e-10});
      const double d_scale = std::max({px.lpNorm<Eigen::Infinity>(),
                                       qp.q.lpNorm<Eigen::Infinity>(),
                                       aty.lpNorm<Eigen::Infinity>(), 1e-10});
      const double ratio =
          std::sqrt((r_prim / p_scale) / std::max(r_dual / d_scale, 1e-16));
      if (ratio > 5.0 || ratio < 0.2) {
        rho_base = std::clamp(rho_base * ratio, 1e-6, 1e6);
        rho = rho_vector(rho_base);
        factorize();
      }
    }
  }

  sol.x = x;
  sol.dual = y;
  sol.status = status;
  sol.iterations = std::min(iter, cfg.max_iter);
  sol.primal_residual = r_prim;
  sol.dual_residual = r_dual;

  if (status == SolveStatus::kPrimalInfeasible) {
    return sol;
  }
  sol.objective = qp.objective_value(sol.x);

  if (cfg.polish && status == SolveStatus::kSolved) {
    // Active set from the dual signs; equality rows are always active.
    std::vector<int> active;
    std::vector<double> active_rhs;
    for (int i = 0; i < m; ++i) {
      if (i < sc.m_eq) {
        active.push_back(i);
        active_rhs.push_back(sc.l(i));
      } else if (y(i) < -1e-10) {
        active.push_back(i);
        active_rhs.push_back(sc.l(i));
      } else if (y(i) > 1e-10) {
        active.push_back(i);
        active_rhs.push_back(sc.u(i));
      }
    }
    const int na = static_cast<int>(active.size());
    if (na > 0) {
      const double delta = 1e-9;
      Eigen::MatrixXd kp_exact = Eigen::MatrixXd::Zero(n + na, n + na);
      kp_exact.topLeftCorner(n, n) = P;
      for (int r = 0; r < na; ++r) {
        kp_exact.block(n + r, 0, 1, n) =
            sc.A.row(active[static_cast<size_t>(r)]);
        kp_exact.block(0, n + r, n, 1) =
            sc.A.row(active[static_cast<size_t>(r)]).transpose();
      }
      Eigen::MatrixXd kp = kp_exact;
      kp.topLeftCorner(n, n) += delta * Eigen::MatrixXd::Identity(n, n);
      for (int r = 0; r < na; ++r) kp(n + r, n + r) = -delta;
      Eigen::VectorXd rhs(n + na);
      rhs.head(n) = -qp.q;
      for (int r = 0; r < na; ++r) rhs(n + r) = active_rhs[static_cast<size_t>(r)];

      // Refine against the unregularized KKT system so the perturbation
      // introduced by delta washes out of the final iterate.
      Eigen::LDLT<Eigen::MatrixXd> pol(kp);
      Eigen::VectorXd sol_vec = pol.solve(rhs);
      for (int refine = 0; refine < 6; ++refine) {
        sol_vec += pol.solve(rhs - kp_exact * sol_vec);
      }
      const Eigen::VectorXd x_pol = sol_vec.head(n);
      Eigen::VectorXd y_pol = Eigen::VectorXd::Zero(m);
      for (int r = 0; r < na; ++r) {
        y_pol(active[static_cast<size_t>(r)]) = sol_vec(n + r);
      }
      if (x_pol.allFinite() && y_pol.allFinite()) {
        const Eigen::VectorXd ax = sc.A * x_pol;
        const double prim_pol =
            std::max((sc.l - ax).maxCoeff(), (ax - sc.u).maxCoeff());
        const double dual_pol =
            (P * x_pol + qp.q + sc.A.transpose() * y_pol)
                .lpNorm<Eigen::Infinity>();
        const Eigen::VectorXd ax0 = sc.A * x;
        const double prim_cur =
            std::max((sc.l - ax0).maxCoeff(), (ax0 - sc.u).maxCoeff());
        if (prim_pol <= std::max(prim_cur, cfg.eps_abs) &&
            dual_pol <= std::max(sol.dual_residual, cfg.eps_abs)) {
          sol.x = x_pol;
          sol.dual = y_pol;
          sol.primal_residual = std::max(prim_pol, 0.0);
          sol.dual_residual = dual_pol;
          sol.objective = qp.objective_value(x_pol);
          sol.polished = true;
        }
      }
    }
  }
  return sol;
}

/// Residual summary recomputed from the problem data alone. Constraints
/// violated beyond 10 * eps_abs land in flagged_rows (stacked indices,
/// equalities first).
inline KKTReport kkt_report(const QPProblem& qp, const Solution& sol,
                            double eps_abs = 1e-6) {
  KKTReport report;
  if (sol.status == SolveStatus::kPrimalInfeasible || sol.x.size() != qp.dim) {
    report.has_solution = false;
    return report;
  }
  report.has_solution = true;
  const detail::StackedProblem sc = detail::stack_constraints(qp);
  const Eigen::VectorXd ax = sc.A * sol.x;
  const double flag_tol = 10.0 * eps_abs;

  for (int i = 0; i < sc.m_eq; ++i) {
    const double v = std::abs(ax(i) - sc.l(i));
    report.eq_residual = std::max(report.eq_residual, v);
    if (v > flag_tol) report.flagged_rows.push_back(i);
  }
  for (int i = sc.m_eq; i < ax.size(); ++i) {
    const double v = std::max({sc.l(i) - ax(i), ax(i) - sc.u(i), 0.0});
    report.ie_violation = std::max(report.ie_violation, v);
    if (v > flag_tol) report.flagged_rows.push_back(i);
  }
  if (sol.dual.size() == ax.size()) {
    report.stationarity = (2.0 * qp.Q * sol.x + qp.q +
                           sc.A.transpose() * sol.dual)
                              .lpNorm<Eigen::Infinity>();
    for (int i = sc.m_eq; i < ax.size(); ++i) {
      const double y = sol.dual(i);
      double gap = 0.0;
      if (y > 0.0 && std::isfinite(sc.u(i))) gap = y * (sc.u(i) - ax(i));
      if (y < 0.0 && std::isfinite(sc.l(i))) gap = -y * (ax(i) - sc.l(i));
      report.complementarity = std::max(report.complementarity, std::abs(gap));
    }
  }
  return report;
}

}  // namespace stplan

#endif  // STPLAN_QP_SOLVER_HPP_
