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

#ifndef STPLAN_QP_PROBLEM_HPP_
#define STPLAN_QP_PROBLEM_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "stplan/bezier.hpp"
#include "stplan/corridor.hpp"
#include "stplan/errors.hpp"

namespace stplan {

// The optimization works on value-level control points x_i^k = h_k c_i^k
// (meters), stacked segment-major. In this basis the station curve on
// segment k is s(T_k + u h_k) = sum_i x_i^k b_n^i(u): endpoint stations
// are single variables and the corridor conditions are plain boxes.

/// Objective weights of the smoothing QP. cruise_speed and s_end_ref are
/// the speed and terminal-station references the tracking terms pull to.
struct CostWeights {
  double w1 = 0.1;   // heuristic-profile tracking
  double w2 = 0.1;   // cruise-speed tracking
  double w3 = 10.0;  // acceleration
  double w4 = 5.0;   // jerk
  double w5 = 3.0;   // terminal station
  double cruise_speed = 10.0;  // m/s
  double s_end_ref = 0.0;      // meters, heuristic station at the horizon

  void validate() const {
    if (w1 < 0 || w2 < 0 || w3 < 0 || w4 < 0 || w5 < 0) {
      throw std::invalid_argument("CostWeights: weights must be >= 0");
    }
    if (!(w3 + w4 > 0)) {
      throw std::invalid_argument("CostWeights: need w3 + w4 > 0");
    }
  }
};

/// Hard kinematic limits. kappa holds per-segment maximum path curvature;
/// a single entry applies everywhere, a longer list is indexed by segment
/// (clamped to its last entry).
struct PhysicalLimits {
  double v_max = 20.0;  // m/s
  double a_min = -4.0;  // m/s^2
  double a_max = 3.0;   // m/s^2
  double j_min = -10.0;  // m/s^3
  double j_max = 10.0;   // m/s^3
  double a_cm = 1.5;     // m/s^2, max centripetal acceleration
  std::vector<double> kappa;  // 1/m, empty means straight path

  void validate() const {
    if (!(a_min < 0) || !(0 < a_max) || !(j_min < 0) || !(0 < j_max) ||
        !(a_cm > 0) || !(v_max > 0)) {
      throw std::invalid_argument("PhysicalLimits: invalid bounds");
    }
    for (double k : kappa) {
      if (k < 0) throw std::invalid_argument("PhysicalLimits: kappa < 0");
    }
  }

  /// Speed cap of segment k: road limit and the lateral-acceleration cap
  /// sqrt(a_cm / kappa_k); zero curvature leaves only the road limit.
  double speed_cap(size_t k) const {
    if (kappa.empty()) return v_max;
    const double kap = kappa[std::min(k, kappa.size() - 1)];
    if (kap <= 0.0) return v_max;
    return std::min(v_max, std::sqrt(a_cm / kap));
  }
};

/// Quadratic program min x'Qx + q'x + const_term subject to A_eq x = b_eq
/// and ie_lower <= A_ie x <= ie_upper. Each constraint row carries a
/// provenance tag naming the condition that produced it.
struct QPProblem {
  int dim = 0;
  Eigen::MatrixXd Q;
  Eigen::VectorXd q;
  double const_term = 0.0;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd A_ie;
  Eigen::VectorXd ie_lower;
  Eigen::VectorXd ie_upper;
  std::vector<std::string> eq_provenance;
  std::vector<std::string> ie_provenance;

  double objective_value(const Eigen::VectorXd& x) const {
    return x.dot(Q * x) + q.dot(x) + const_term;
  }

  /// Dense row listing for cross-checking against external solvers.
  std::string debug_dump() const {
    std::ostringstream os;
    os.precision(12);
    os << "dim " << dim << "\nQ\n" << Q << "\nq\n" << q.transpose()
       << "\nconst " << const_term << "\n";
    for (int r = 0; r < A_eq.rows(); ++r) {
      os << "eq[" << r << "] (" << eq_provenance[static_cast<size_t>(r)]
         << "): " << A_eq.row(r) << " = " << b_eq(r) << "\n";
    }
    for (int r = 0; r < A_ie.rows(); ++r) {
      os << "ie[" << r << "] (" << ie_provenance[static_cast<size_t>(r)]
         << "): " << ie_lower(r) << " <= " << A_ie.row(r)
         << " <= " << ie_upper(r) << "\n";
    }
    return os.str();
  }
};

struct ObjectiveBlock {
  Eigen::MatrixXd Q;
  Eigen::VectorXd q;
  double const_term = 0.0;
};

struct EqualityBlock {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  std::vector<std::string> provenance;
};

struct InequalityBlock {
  Eigen::MatrixXd A;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<std::string> provenance;
};

enum class CorridorMode { kTrapezoidal, kRectangular };

inline const char* to_string(CorridorMode mode) {
  return mode == CorridorMode::kTrapezoidal ? "trapezoidal" : "rectangular";
}

/// Gram matrix of the squared l-th time derivative over one segment in
/// the normalized monomial basis: with f(u) = sum_i p_i u^i and
/// s(t) = h f((t - T_k)/h), p' G p integrates (d^l s/dt^l)^2 over the
/// segment. Entries [i!/(i-l)!][j!/(j-l)!]/(i+j+1-2l) scaled by h^(3-2l).
inline Eigen::MatrixXd derivative_gram(int n, int l, double h) {
  if (l < 0 || l > n || !(h > 0.0)) {
    throw std::invalid_argument("derivative_gram: bad order or duration");
  }
  const auto falling = [](int i, int l_) {
    double f = 1.0;
    for (int r = 0; r < l_; ++r) f *= static_cast<double>(i - r);
    return f;
  };
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n + 1, n + 1);
  const double scale = std::pow(h, 3 - 2 * l);
  for (int i = l; i <= n; ++i) {
    for (int j = l; j <= n; ++j) {
      g(i, j) = scale * falling(i, l) * falling(j, l) /
                static_cast<double>(i + j + 1 - 2 * l);
    }
  }
  return g;
}

/// Reference line of one region, resampled from the DP interpolant.
using RefLine = HeuristicProfile::Segment;

/// Quadratic objective of the smoothing QP. Tracking, smoothness and
/// terminal terms are built per segment in monomial space, conjugated
/// into control-point space through the transition matrix inverse, and
/// the endpoint-valued terms (cruise cross term, terminal station) are
/// added directly on the endpoint variables. Constant terms are kept so
/// the reported objective equals the cost integral itself.
inline ObjectiveBlock build_objective(const std::vector<Region>& regions,
                                      const std::vector<RefLine>& ref_lines,
                                      const CostWeights& weights, int n) {
  if (regions.empty() || ref_lines.size() != regions.size()) {
    throw DimensionMismatchError("build_objective: regions/ref_lines mismatch");
  }
  const int pts = n + 1;
  const int dim = static_cast<int>(regions.size()) * pts;
  const Eigen::MatrixXd w_inv = inverse_transition_matrix(n);

  ObjectiveBlock obj;
  obj.Q = Eigen::MatrixXd::Zero(dim, dim);
  obj.q = Eigen::VectorXd::Zero(dim);
  obj.const_term = 0.0;

  for (size_t k = 0; k < regions.size(); ++k) {
    const double h = regions[k].duration;
    const double a = ref_lines[k].slope;
    const double b = ref_lines[k].intercept;
    const double inv_h2 = 1.0 / (h * h);

    Eigen::MatrixXd qp = Eigen::MatrixXd::Zero(pts, pts);
    qp += weights.w1 * inv_h2 * derivative_gram(n, 0, h);
    qp += weights.w2 * inv_h2 * derivative_gram(n, 1, h);
    qp += weights.w3 * inv_h2 * derivative_gram(n, 2, h);
    qp += weights.w4 * inv_h2 * derivative_gram(n, 3, h);

    Eigen::VectorXd lp = Eigen::VectorXd::Zero(pts);
    for (int i = 0; i <= n; ++i) {
      lp(i) = -2.0 * weights.w1 * h *
              (a * h / static_cast<double>(i + 2) + b / static_cast<double>(i + 1));
    }
    obj.const_term += weights.w1 * h * (a * a * h * h / 3.0 + a * b * h + b * b);

    const int base = static_cast<int>(k) * pts;
    obj.Q.block(base, base, pts, pts) += w_inv.transpose() * qp * w_inv;
    obj.q.segment(base, pts) += w_inv.transpose() * lp;

    // Cruise term cross product: integral of s_dot over the segment is
    // the endpoint difference, exact even without continuity.
    obj.q(base + n) += -2.0 * weights.w2 * weights.cruise_speed;
    obj.q(base) += 2.0 * weights.w2 * weights.cruise_speed;
    obj.const_term +=
        weights.w2 * weights.cruise_speed * weights.cruise_speed * h;
  }

  const int last = dim - 1;
  obj.Q(last, last) += weights.w5;
  obj.q(last) += -2.0 * weights.w5 * weights.s_end_ref;
  obj.const_term += weights.w5 * weights.s_end_ref * weights.s_end_ref;

  // Symmetrize away accumulation noise.
  obj.Q = 0.5 * (obj.Q + obj.Q.transpose()).eval();
  return obj;
}

/// Start conditions on segment 0: station, speed and acceleration at
/// t = 0 expressed through the first three control points.
inline EqualityBlock build_boundary_constraints(const InitialState& init,
                                                int n, double h0) {
  if (n < 2 || !(h0 > 0.0)) {
    throw std::invalid_argument("build_boundary_constraints: need n >= 2");
  }
  EqualityBlock block;
  block.A = Eigen::MatrixXd::Zero(3, n + 1);
  block.b = Eigen::VectorXd::Zero(3);
  block.A(0, 0) = 1.0;
  block.b(0) = init.s0;
  const double nv = static_cast<double>(n) / h0;
  block.A(1, 0) = -nv;
  block.A(1, 1) = nv;
  block.b(1) = init.v0;
  const double na = static_cast<double>(n) * (n - 1) / (h0 * h0);
  block.A(2, 0) = na;
  block.A(2, 1) = -2.0 * na;
  block.A(2, 2) = na;
  block.b(2) = init.a0;
  block.provenance = {"boundary:s0", "boundary:v0", "boundary:a0"};
  return block;
}

/// Junction continuity of station, speed and acceleration between
/// consecutive segments, expanded to rows over raw control points via
/// hodograph differences with the per-segment duration scaling.
inline EqualityBlock build_continuity_constraints(
    const std::vector<Region>& regions, int n) {
  if (regions.size() < 2) {
    throw std::invalid_argument("build_continuity_constraints: need >= 2");
  }
  const int pts = n + 1;
  const int dim = static_cast<int>(regions.size()) * pts;
  const int junctions = static_cast<int>(regions.size()) - 1;
  EqualityBlock block;
  block.A = Eigen::MatrixXd::Zero(3 * junctions, dim);
  block.b = Eigen::VectorXd::Zero(3 * junctions);
  for (int k = 0; k < junctions; ++k) {
    const double hk = regions[static_cast<size_t>(k)].duration;
    const double hn = regions[static_cast<size_t>(k) + 1].duration;
    const int lhs = k * pts + n;      // last point of segment k
    const int rhs = (k + 1) * pts;    // first point of segment k+1
    int row = 3 * k;

    block.A(row, lhs) = 1.0;
    block.A(row, rhs) = -1.0;
    block.provenance.push_back("continuity:k=" + std::to_string(k) + ",l=0");

    ++row;
    const double vk = static_cast<double>(n) / hk;
    const double vn = static_cast<double>(n) / hn;
    block.A(row, lhs) = vk;
    block.A(row, lhs - 1) = -vk;
    block.A(row, rhs + 1) = -vn;
    block.A(row, rhs) = vn;
    block.provenance.push_back("continuity:k=" + std::to_string(k) + ",l=1");

    ++row;
    const double ak = static_cast<double>(n) * (n - 1) / (hk * hk);
    const double an = static_cast<double>(n) * (n - 1) / (hn * hn);
    block.A(row, lhs) = ak;
    block.A(row, lhs - 1) = -2.0 * ak;
    block.A(row, lhs - 2) = ak;
    block.A(row, rhs) = -an;
    block.A(row, rhs + 1) = 2.0 * an;
    block.A(row, rhs + 2) = -an;
    block.provenance.push_back("continuity:k=" + std::to_string(k) + ",l=2");
  }
  return block;
}

/// Corridor conditions on the control points, one box row per point.
/// Trapezoidal mode anchors each bound on the region line at u = i/n
/// (always a nonempty pair under strict line separation); rectangular
/// mode uses the classical constant box, which is empty exactly when
/// lbias + h * lskew > ubias; those regions are reported and the call
/// throws RectInfeasibleError.
inline InequalityBlock build_safety_constraints(
    const std::vector<Region>& regions, int n, CorridorMode mode) {
  const int pts = n + 1;
  const int dim = static_cast<int>(regions.size()) * pts;
  InequalityBlock block;
  block.A = Eigen::MatrixXd::Zero(dim, dim);
  block.lower = Eigen::VectorXd::Zero(dim);
  block.upper = Eigen::VectorXd::Zero(dim);

  std::vector<int> bad_regions;
  std::vector<double> duration_bounds;
  for (size_t k = 0; k < regions.size(); ++k) {
    const Region& reg = regions[k];
    const double h = reg.duration;
    for (int i = 0; i <= n; ++i) {
      const int row = static_cast<int>(k) * pts + i;
      block.A(row, row) = 1.0;
      double lo, hi;
      if (mode == CorridorMode::kTrapezoidal) {
        const double m_i1 = static_cast<double>(i) / n;
        lo = reg.lbias + h * reg.lskew * m_i1;
        hi = reg.ubias + h * reg.uskew * m_i1;
      } else {
        lo = reg.lbias + h * reg.lskew;
        hi = reg.ubias;
      }
      block.lower(row) = lo;
      block.upper(row) = hi;
      block.provenance.push_back("safety:" + std::string(to_string(mode)) +
                                 ":k=" + std::to_string(k) +
                                 ",i=" + std::to_string(i));
      if (mode == CorridorMode::kRectangular && lo > hi &&
          (bad_regions.empty() || bad_regions.back() != static_cast<int>(k))) {
        bad_regions.push_back(static_cast<int>(k));
        duration_bounds.push_back(reg.lskew > 0.0
                                      ? (reg.ubias - reg.lbias) / reg.lskew
                                      : std::numeric_limits<double>::infinity());
      }
    }
  }
  if (!bad_regions.empty()) {
    std::ostringstream os;
    os << "build_safety_constraints: rectangular corridor empty for regions";
    for (size_t j = 0; j < bad_regions.size(); ++j) {
      os << " " << bad_regions[j] << " (h=" << regions[static_cast<size_t>(bad_regions[j])].duration
         << " > max feasible " << duration_bounds[j] << ")";
    }
    throw RectInfeasibleError(os.str(), bad_regions, duration_bounds);
  }
  return block;
}

/// Velocity, acceleration and jerk bounds on the hodograph control
/// points of every segment; the velocity cap folds in the per-segment
/// lateral-acceleration limit.
inline InequalityBlock build_physical_constraints(
    const std::vector<Region>& regions, int n, const PhysicalLimits& limits) {
  limits.validate();
  const int pts = n + 1;
  const int dim = static_cast<int>(regions.size()) * pts;
  const int per_segment = (n >= 1 ? n : 0) + (n >= 2 ? n - 1 : 0) + (n >= 3 ? n - 2 : 0);
  const int rows = static_cast<int>(regions.size()) * per_segment;
  InequalityBlock block;
  block.A = Eigen::MatrixXd::Zero(rows, dim);
  block.lower = Eigen::VectorXd::Zero(rows);
  block.upper = Eigen::VectorXd::Zero(rows);

  int row = 0;
  for (size_t k = 0; k < regions.size(); ++k) {
    const double h = regions[k].duration;
    const int base = static_cast<int>(k) * pts;
    const double cap = limits.speed_cap(k);
    const double cv = static_cast<double>(n) / h;
    for (int i = 0; i + 1 <= n; ++i, ++row) {
      block.A(row, base + i) = -cv;
      block.A(row, base + i + 1) = cv;
      block.lower(row) = 0.0;  // no reversing
      block.upper(row) = cap;
      block.provenance.push_back("physical:vel:k=" + std::to_string(k) +
                                 ",i=" + std::to_string(i));
    }
    const double ca = static_cast<double>(n) * (n - 1) / (h * h);
    for (int i = 0; i + 2 <= n; ++i, ++row) {
      block.A(row, base + i) = ca;
      block.A(row, base + i + 1) = -2.0 * ca;
      block.A(row, base + i + 2) = ca;
      block.lower(row) = limits.a_min;
      block.upper(row) = limits.a_max;
      block.provenance.push_back("physical:acc:k=" + std::to_string(k) +
                                 ",i=" + std::to_string(i));
    }
    const double cj = static_cast<double>(n) * (n - 1) * (n - 2) / (h * h * h);
    for (int i = 0; i + 3 <= n; ++i, ++row) {
      block.A(row, base + i) = -cj;
      block.A(row, base + i + 1) = 3.0 * cj;
      block.A(row, base + i + 2) = -3.0 * cj;
      block.A(row, base + i + 3) = cj;
      block.lower(row) = limits.j_min;
      block.upper(row) = limits.j_max;
      block.provenance.push_back("physical:jerk:k=" + std::to_string(k) +
                                 ",i=" + std::to_string(i));
    }
  }
  return block;
}

/// Stacks the objective and constraint blocks into one QPProblem,
/// dropping exactly repeated equality rows.
inline QPProblem assemble(int dim, const ObjectiveBlock& objective,
                          const std::vector<EqualityBlock>& equalities,
                          const std::vector<InequalityBlock>& inequalities) {
  if (objective.Q.rows() != dim || objective.Q.cols() != dim ||
      objective.q.size() != dim) {
    throw DimensionMismatchError("assemble: objective dimension mismatch");
  }
  QPProblem qp;
  qp.dim = dim;
  qp.Q = objective.Q;
  qp.q = objective.q;
  qp.const_term = objective.const_term;

  int eq_rows = 0;
  for (const EqualityBlock& b : equalities) {
    if (b.A.cols() != dim || b.A.rows() != b.b.size() ||
        b.provenance.size() != static_cast<size_t>(b.A.rows())) {
      throw DimensionMismatchError("assemble: equality block mismatch");
    }
    eq_rows += static_cast<int>(b.A.rows());
  }
  qp.A_eq.resize(eq_rows, dim);
  qp.b_eq.resize(eq_rows);
  int r = 0;
  for (const EqualityBlock& b : equalities) {
    for (int i = 0; i < b.A.rows(); ++i) {
      bool duplicate = false;
      for (int j = 0; j < r && !duplicate; ++j) {
        duplicate = (qp.A_eq.row(j) == b.A.row(i)) && qp.b_eq(j) == b.b(i);
      }
      if (duplicate) continue;
      qp.A_eq.row(r) = b.A.row(i);
      qp.b_eq(r) = b.b(i);
      qp.eq_provenance.push_back(b.provenance[static_cast<size_t>(i)]);
      ++r;
    }
  }
  qp.A_eq.conservativeResize(r, dim);
  qp.b_eq.conservativeResize(r);

  int ie_rows = 0;
  for (const InequalityBlock& b : inequalities) {
    if (b.A.cols() != dim || b.A.rows() != b.lower.size() ||
        b.A.rows() != b.upper.size() ||
        b.provenance.size() != static_cast<size_t>(b.A.rows())) {
      throw DimensionMismatchError("assemble: inequality block mismatch");
    }
    ie_rows += static_cast<int>(b.A.rows());
  }
  qp.A_ie.resize(ie_rows, dim);
  qp.ie_lower.resize(ie_rows);
  qp.ie_upper.resize(ie_rows);
  r = 0;
  for (const InequalityBlock& b : inequalities) {
    for (int i = 0; i < b.A.rows(); ++i) {
      qp.A_ie.row(r) = b.A.row(i);
      qp.ie_lower(r) = b.lower(i);
      qp.ie_upper(r) = b.upper(i);
      qp.ie_provenance.push_back(b.provenance[static_cast<size_t>(i)]);
      ++r;
    }
  }
  return qp;
}

}  // namespace stplan

#endif  // STPLAN_QP_PROBLEM_HPP_
