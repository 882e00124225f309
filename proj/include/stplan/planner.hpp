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

#ifndef STPLAN_PLANNER_HPP_
#define STPLAN_PLANNER_HPP_

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stplan/bezier.hpp"
#include "stplan/corridor.hpp"
#include "stplan/dp_search.hpp"
#include "stplan/qp_problem.hpp"
#include "stplan/qp_solver.hpp"
#include "stplan/st_graph.hpp"

namespace stplan {

/// One planning problem: horizon, start state, references, limits and
/// the obstacle projection onto the S-T plane.
struct Scenario {
  double horizon_T = 7.0;
  InitialState initial{0.0, 10.0, 0.0};
  double cruise_speed = 10.0;
  PhysicalLimits limits;
  std::vector<ObstacleTrace> obstacles;
  double dt1 = 1.0;          // coarse DP step
  double ds = 0.5;           // station step
  int fine_per_coarse = 10;  // N, dt2 = dt1 / N

  double dt2() const { return dt1 / fine_per_coarse; }

  STGrid make_grid() const {
    STGrid grid;
    grid.horizon_T = horizon_T;
    grid.dt1 = dt1;
    grid.ds = ds;
    grid.s_max = initial.s0 + limits.v_max * horizon_T;
    return grid;
  }

  void validate() const {
    if (!(horizon_T > 0.0)) {
      throw std::invalid_argument("Scenario: horizon_T must be > 0");
    }
    if (fine_per_coarse < 1) {
      throw std::invalid_argument("Scenario: N must be >= 1");
    }
    initial.validate();
    limits.validate();
    make_grid().validate();
    for (const ObstacleTrace& ob : obstacles) ob.validate(horizon_T);
    if (!(cruise_speed >= 0.0) || cruise_speed > limits.v_max) {
      throw std::invalid_argument("Scenario: cruise_speed outside [0, v_max]");
    }
  }
};

struct PlannerConfig {
  CorridorMode mode = CorridorMode::kTrapezoidal;
  int degree = 5;  // Bezier degree, >= 3 for acceleration continuity
  double w1 = 0.1, w2 = 0.1, w3 = 10.0, w4 = 5.0, w5 = 3.0;
  DpWeights dp;
  SolverConfig solver;
  double eps_skew = 1e-3;            // m/s, region skew-change tolerance
  double min_region_duration = 0.2;  // seconds, RegionMerge threshold
  double max_region_duration = 1.0;  // seconds, RegionSplit cap
  double internal_verify_dt = 1e-3;  // seconds, post-solve safety sampling

  void validate() const {
    if (degree < 3) {
      throw std::invalid_argument("PlannerConfig: degree must be >= 3");
    }
    CostWeights weights;
    weights.w1 = w1;
    weights.w2 = w2;
    weights.w3 = w3;
    weights.w4 = w4;
    weights.w5 = w5;
    weights.validate();
  }
};

enum class PlanStage {
  kDpSearch,
  kBounds,
  kRegions,
  kQpBuild,
  kQpSolve,
  kVerify,
  kDone
};

inline const char* to_string(PlanStage s) {
  switch (s) {
    case PlanStage::kDpSearch: return "dp_search";
    case PlanStage::kBounds: return "bounds";
    case PlanStage::kRegions: return "regions";
    case PlanStage::kQpBuild: return "qp_build";
    case PlanStage::kQpSolve: return "qp_solve";
    case PlanStage::kVerify: return "verify";
    case PlanStage::kDone: return "done";
  }
  return "unknown";
}

struct StageTimings {
  int64_t dp_us = 0;
  int64_t bounds_us = 0;
  int64_t regions_us = 0;
  int64_t build_us = 0;
  int64_t solve_us = 0;
  int64_t verify_us = 0;
  int64_t total_us = 0;
};

struct PlanResult {
  BezierSpline spline;
  std::vector<Region> regions;
  HeuristicProfile heuristic;
  double objective_J = 0.0;
  Solution solve_stats;
  StageTimings timings;
};

struct PlanFailure {
  PlanStage stage = PlanStage::kDone;
  std::string message;
  std::vector<int> region_indices;         // rectangular-infeasible regions
  std::vector<double> feasible_durations;  // per region, max feasible h
};

struct PlanOutcome {
  bool ok = false;
  PlanResult result;
  PlanFailure failure;
};

/// Comfort summary of a speed profile. avg_accel is the paper-style RMS
/// sqrt((1/T) integral of sdot2^2), computed in closed form.
struct ComfortMetrics {
  double max_abs_accel = 0.0;  // m/s^2
  double avg_accel = 0.0;      // m/s^2
  double max_abs_jerk = 0.0;   // m/s^3
};

struct SafetyViolation {
  enum class Kind { kBelowBand, kAboveBand, kInsideObstacle };
  Kind kind;
  double t = 0.0;
  double s = 0.0;
  double amount = 0.0;  // meters beyond tolerance
};

namespace detail {

inline int64_t elapsed_us(std::chrono::steady_clock::time_point from) {
  return std::chrono::duration_cast<std::chrono::microseconds>(
             std::chrono::steady_clock::now() - from)
      .count();
}

struct SharedStages {
  STGrid grid;
  HeuristicProfile heuristic;
  BoundsProfile bounds;
  std::vector<Region> regions;
  std::vector<RefLine> ref_lines;
  double s_end_ref = 0.0;
  int64_t dp_us = 0;
  int64_t bounds_us = 0;
  int64_t regions_us = 0;
};

/// DP search, bound extraction and region generation: everything the
/// corridor mode does not influence.
inline std::pair<std::optional<SharedStages>, PlanFailure> run_shared_stages(
    const Scenario& scenario, const PlannerConfig& config) {
  SharedStages out;
  PlanFailure failure;
  out.grid = scenario.make_grid();

  DpLimits dp_limits;
  dp_limits.v_max = scenario.limits.v_max;
  dp_limits.a_max =
      std::max(std::abs(scenario.limits.a_min), scenario.limits.a_max);

  auto tic = std::chrono::steady_clock::now();
  try {
    out.heuristic = search(out.grid, scenario.obstacles, scenario.initial,
                           dp_limits, config.dp, scenario.cruise_speed);
  } catch (const NoFeasiblePathError& e) {
    failure.stage = PlanStage::kDpSearch;
    failure.message = e.what();
    return {std::nullopt, failure};
  }
  out.dp_us = elapsed_us(tic);

  tic = std::chrono::steady_clock::now();
  try {
    out.bounds = extract_bounds(out.heuristic, scenario.obstacles,
                                scenario.dt2(), out.grid.s_max);
  } catch (const EmptyIntervalError& e) {
    failure.stage = PlanStage::kBounds;
    failure.message = e.what();
    return {std::nullopt, failure};
  }
  out.bounds_us = elapsed_us(tic);

  tic = std::chrono::steady_clock::now();
  try {
    out.regions = generate_regions(out.bounds, config.eps_skew);
    out.regions = region_split(out.regions, scenario.dt2(),
                               config.max_region_duration);
    out.regions = region_merge(out.regions, scenario.dt2(),
                               config.min_region_duration);
  } catch (const DegenerateBoundsError& e) {
    failure.stage = PlanStage::kRegions;
    failure.message = e.what();
    return {std::nullopt, failure};
  }
  const RegionSafetyReport report = validate_regions(out.regions, out.bounds);
  if (!report.ok()) {
    failure.stage = PlanStage::kRegions;
    failure.message = "region validation found " +
                      std::to_string(report.violations.size()) +
                      " violation(s)";
    return {std::nullopt, failure};
  }
  out.regions_us = elapsed_us(tic);

  out.ref_lines.reserve(out.regions.size());
  for (const Region& reg : out.regions) {
    RefLine line;
    const double s_beg = out.heuristic.value_at(reg.t_start);
    const double s_end = out.heuristic.value_at(reg.end_time());
    line.intercept = s_beg;
    line.slope = (s_end - s_beg) / reg.duration;
    out.ref_lines.push_back(line);
  }
  out.s_end_ref = out.heuristic.value_at(out.grid.horizon_T);
  return {out, failure};
}

}  // namespace detail

/// Band and obstacle check of a finished plan: samples the spline at
/// sample_dt over the horizon and reports stations outside the covering
/// region band by more than tol, or inside an original obstacle
/// parallelogram by more than tol. Report-only, never throws.
inline std::vector<SafetyViolation> verify_safety(
    const PlanResult& result, const std::vector<ObstacleTrace>& obstacles,
    double sample_dt, double tol = 1e-6) {
  std::vector<SafetyViolation> violations;
  if (result.regions.empty()) return violations;
  const double T = result.spline.total_T;
  const int samples = static_cast<int>(std::floor(T / sample_dt + 1e-9));
  size_t region_idx = 0;
  for (int i = 0; i <= samples; ++i) {
    const double t = std::min(static_cast<double>(i) * sample_dt, T);
    while (region_idx + 1 < result.regions.size() &&
           t > result.regions[region_idx].end_time() + 1e-12) {
      ++region_idx;
    }
    const Region& reg = result.regions[region_idx];
    const double s = result.spline.evaluate(t, 0);
    const double lo = reg.lower_at(t);
    const double hi = reg.upper_at(t);
    if (s < lo - tol) {
      violations.push_back(
          {SafetyViolation::Kind::kBelowBand, t, s, lo - s - tol});
    } else if (s > hi + tol) {
      violations.push_back(
          {SafetyViolation::Kind::kAboveBand, t, s, s - hi - tol});
    }
    for (const ObstacleTrace& ob : obstacles) {
      if (!ob.covers(t)) continue;
      const double depth = std::min(s - ob.s_low(t), ob.s_high(t) - s);
      if (depth > tol) {
        violations.push_back(
            {SafetyViolation::Kind::kInsideObstacle, t, s, depth - tol});
      }
    }
  }
  return violations;
}

/// Comfort metrics of a speed profile. The RMS acceleration uses the
/// exact Gram-matrix quadrature; the maxima come from dense sampling
/// refined by a golden-section pass around the best bracket.
inline ComfortMetrics comfort_metrics(const BezierSpline& spline) {
  spline.validate();
  ComfortMetrics metrics;
  double accel_energy = 0.0;  // integral of sdot2^2

  for (const BezierSegment& seg : spline.segments) {
    const int n = seg.degree;
    const double h = seg.duration;
    const Eigen::MatrixXd w_inv = inverse_transition_matrix(n);
    const std::vector<double> scaled = seg.scaled_control();
    Eigen::VectorXd x =
        Eigen::Map<const Eigen::VectorXd>(scaled.data(), n + 1);
    const Eigen::VectorXd p = w_inv * x;
    accel_energy += p.dot((derivative_gram(n, 2, h) / (h * h)) * p);

    for (const int order : {2, 3}) {
      if (order > n) continue;
      double& target =
          (order == 2) ? metrics.max_abs_accel : metrics.max_abs_jerk;
      const int steps = std::max(2, static_cast<int>(std::ceil(h / 1e-3)));
      double best_u = 0.0, best_v = -1.0;
      for (int i = 0; i <= steps; ++i) {
        const double u = static_cast<double>(i) / steps;
        const double v = std::abs(seg.evaluate_local(u, order));
        if (v > best_v) {
          best_v = v;
          best_u = u;
        }
      }
      // Golden-section refinement in the bracket around the best sample.
      double a = std::max(0.0, best_u - 1.0 / steps);
      double b = std::min(1.0, best_u + 1.0 / steps);
      const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
      double c = b - gr * (b - a), d = a + gr * (b - a);
      double fc = std::abs(seg.evaluate_local(c, order));
      double fd = std::abs(seg.evaluate_local(d, order));
      for (int it = 0; it < 60; ++it) {
        if (fc > fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - gr * (b - a);
          fc = std::abs(seg.evaluate_local(c, order));
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + gr * (b - a);
          fd = std::abs(seg.evaluate_local(d, order));
        }
      }
      target = std::max(target, std::max({best_v, fc, fd}));
    }
  }
  metrics.avg_accel = std::sqrt(std::max(accel_energy, 0.0) / spline.total_T);
  return metrics;
}

namespace detail {

/// The corridor-mode-dependent tail of the pipeline: QP assembly, solve,
/// spline extraction and the post-solve safety check.
inline PlanOutcome run_mode_stages(const Scenario& scenario,
                                   const PlannerConfig& config,
                                   const SharedStages& shared) {
  PlanOutcome outcome;
  PlanResult result;
  result.heuristic = shared.heuristic;
  result.regions = shared.regions;
  result.timings.dp_us = shared.dp_us;
  result.timings.bounds_us = shared.bounds_us;
  result.timings.regions_us = shared.regions_us;

  const int n = config.degree;
  const int pts = n + 1;
  const int dim = static_cast<int>(shared.regions.size()) * pts;

  auto tic = std::chrono::steady_clock::now();
  QPProblem qp;
  try {
    CostWeights weights;
    weights.w1 = config.w1;
    weights.w2 = config.w2;
    weights.w3 = config.w3;
    weights.w4 = config.w4;
    weights.w5 = config.w5;
    weights.cruise_speed = scenario.cruise_speed;
    weights.s_end_ref = shared.s_end_ref;

    const ObjectiveBlock objective =
        build_objective(shared.regions, shared.ref_lines, weights, n);
    std::vector<EqualityBlock> eqs;
    EqualityBlock boundary = build_boundary_constraints(
        scenario.initial, n, shared.regions.front().duration);
    EqualityBlock padded;
    padded.A = Eigen::MatrixXd::Zero(boundary.A.rows(), dim);
    padded.A.leftCols(pts) = boundary.A;
    padded.b = boundary.b;
    padded.provenance = boundary.provenance;
    eqs.push_back(std::move(padded));
    if (shared.regions.size() >= 2) {
      eqs.push_back(build_continuity_constraints(shared.regions, n));
    }
    std::vector<InequalityBlock> ies;
    ies.push_back(build_safety_constraints(shared.regions, n, config.mode));
    ies.push_back(
        build_physical_constraints(shared.regions, n, scenario.limits));
    qp = assemble(dim, objective, eqs, ies);
  } catch (const RectInfeasibleError& e) {
    outcome.failure.stage = PlanStage::kQpBuild;
    outcome.failure.message = e.what();
    outcome.failure.region_indices = e.region_indices;
    outcome.failure.feasible_durations = e.max_feasible_durations;
    return outcome;
  }
  result.timings.build_us = detail::elapsed_us(tic);

  tic = std::chrono::steady_clock::now();
  const Solution sol = solve(qp, config.solver);
  result.timings.solve_us = detail::elapsed_us(tic);
  if (sol.status != SolveStatus::kSolved) {
    outcome.failure.stage = PlanStage::kQpSolve;
    outcome.failure.message =
        std::string("solver status: ") + to_string(sol.status);
    return outcome;
  }

  result.solve_stats = sol;
  result.objective_J = sol.objective;
  result.spline.segments.reserve(shared.regions.size());
  double total = 0.0;
  for (size_t k = 0; k < shared.regions.size(); ++k) {
    const Region& reg = shared.regions[k];
    BezierSegment seg;
    seg.degree = n;
    seg.duration = reg.duration;
    seg.t_start = reg.t_start;
    seg.control.resize(static_cast<size_t>(pts));
    for (int i = 0; i < pts; ++i) {
      seg.control[static_cast<size_t>(i)] =
          sol.x(static_cast<int>(k) * pts + i) / reg.duration;
    }
    result.spline.segments.push_back(std::move(seg));
    total += reg.duration;
  }
  result.spline.total_T = total;

  tic = std::chrono::steady_clock::now();
  const std::vector<SafetyViolation> violations = verify_safety(
      result, scenario.obstacles, config.internal_verify_dt);
  result.timings.verify_us = detail::elapsed_us(tic);
  if (!violations.empty()) {
    outcome.failure.stage = PlanStage::kVerify;
    outcome.failure.message = "post-solve safety check found " +
                              std::to_string(violations.size()) +
                              " violation(s)";
    return outcome;
  }

  outcome.ok = true;
  outcome.result = std::move(result);
  return outcome;
}

}  // namespace detail

/// Full pipeline: DP heuristic, discarded-side bounds, convex regions,
/// corridor QP in the requested mode, and a post-solve safety check.
/// Failures are tagged with the stage that produced them.
inline PlanOutcome plan(const Scenario& scenario, const PlannerConfig& config) {
  scenario.validate();
  config.validate();
  const auto t_total = std::chrono::steady_clock::now();

  auto [shared, shared_failure] = detail::run_shared_stages(scenario, config);
  if (!shared.has_value()) {
    PlanOutcome outcome;
    outcome.failure = shared_failure;
    return outcome;
  }
  PlanOutcome outcome = detail::run_mode_stages(scenario, config, *shared);
  if (outcome.ok) {
    outcome.result.timings.total_us = detail::elapsed_us(t_total);
  }
  return outcome;
}

/// Per-mode entry of a comparison run.
struct ModeReport {
  bool ok = false;
  std::string status = "failed";
  double objective_J = std::numeric_limits<double>::quiet_NaN();
  ComfortMetrics metrics;
  double solve_ms = std::numeric_limits<double>::quiet_NaN();
  double total_ms = std::numeric_limits<double>::quiet_NaN();
  PlanFailure failure;  // valid when !ok
};

struct ComparisonReport {
  ModeReport rectangular;
  ModeReport trapezoidal;
};

/// Runs both corridor modes against identical regions (DP, bounds and
/// region generation execute once and are shared) and reports status,
/// objective and comfort per mode.
inline ComparisonReport compare_modes(const Scenario& scenario,
                                      PlannerConfig config) {
  scenario.validate();
  config.validate();
  ComparisonReport report;

  auto [shared, shared_failure] = detail::run_shared_stages(scenario, config);
  for (const CorridorMode mode :
       {CorridorMode::kRectangular, CorridorMode::kTrapezoidal}) {
    ModeReport& entry = (mode == CorridorMode::kRectangular)
                            ? report.rectangular
                            : report.trapezoidal;
    if (!shared.has_value()) {
      entry.status = std::string("failed:") + to_string(shared_failure.stage);
      entry.failure = shared_failure;
      continue;
    }
    config.mode = mode;
    const auto t0 = std::chrono::steady_clock::now();
    const PlanOutcome outcome =
        detail::run_mode_stages(scenario, config, *shared);
    const double mode_ms = static_cast<double>(detail::elapsed_us(t0)) / 1000.0;
    entry.ok = outcome.ok;
    entry.total_ms =
        mode_ms + static_cast<double>(shared->dp_us + shared->bounds_us +
                                      shared->regions_us) /
                      1000.0;
    if (outcome.ok) {
      entry.status = "solved";
      entry.objective_J = outcome.result.objective_J;
      entry.metrics = comfort_metrics(outcome.result.spline);
      entry.solve_ms =
          static_cast<double>(outcome.result.timings.solve_us) / 1000.0;
    } else {
      entry.status = std::string("failed:") + to_string(outcome.failure.stage);
      entry.failure = outcome.failure;
    }
  }
  return report;
}

}  // namespace stplan

#endif  // STPLAN_PLANNER_HPP_
