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

#include "stplan/qp_problem.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_oracles.hpp"

namespace stplan {
namespace {

TEST(DerivativeGram, HilbertBlock) {
  const Eigen::MatrixXd g = derivative_gram(1, 0, 1.0);
  EXPECT_NEAR(g(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(g(0, 1), 0.5, 1e-15);
  EXPECT_NEAR(g(1, 0), 0.5, 1e-15);
  EXPECT_NEAR(g(1, 1), 1.0 / 3.0, 1e-15);
}

TEST(DerivativeGram, ConstantPolynomialHasZeroDerivativeEnergy) {
  const Eigen::MatrixXd g = derivative_gram(4, 1, 2.0);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(5);
  p(0) = 7.0;
  EXPECT_DOUBLE_EQ(p.dot(g * p), 0.0);
}

TEST(DerivativeGram, SecondDerivativeQuadratic) {
  const Eigen::MatrixXd g = derivative_gram(2, 2, 1.0);
  for (int i = 0; i <= 2; ++i) {
    for (int j = 0; j <= 2; ++j) {
      EXPECT_DOUBLE_EQ(g(i, j), (i == 2 && j == 2) ? 4.0 : 0.0);
    }
  }
}

// p' G p equals the quadrature of the squared time derivative for the
// segment s(t) = h f((t - T)/h).
TEST(DerivativeGram, MatchesQuadrature) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 5;
    const double h = 0.4 + 0.4 * (trial % 4);
    std::vector<double> p_mono(static_cast<size_t>(n) + 1);
    for (double& v : p_mono) v = coef(rng);

    BezierSpline spline;
    BezierSegment seg;
    seg.degree = n;
    seg.control = monomial_to_bezier(p_mono);
    seg.duration = h;
    seg.t_start = 0.0;
    spline.segments.push_back(seg);
    spline.total_T = h;

    Eigen::VectorXd p = Eigen::Map<Eigen::VectorXd>(p_mono.data(), n + 1);
    for (int l = 0; l <= 3; ++l) {
      const double closed = p.dot(derivative_gram(n, l, h) * p);
      const double quad = testing::simpson(
          [&](double t) {
            const double d = spline.evaluate(t, l);
            return d * d;
          },
          0.0, h, 2000);
      EXPECT_NEAR(closed, quad, 1e-8 * std::max(1.0, std::abs(quad)))
          << "l=" << l << " h=" << h;
    }
  }
}

std::vector<Region> contiguous_regions(const std::vector<double>& durations,
                                       double lbias = 0.0, double ubias = 80.0) {
  std::vector<Region> regions;
  double t = 0.0;
  int idx = 0;
  for (double h : durations) {
    Region reg;
    reg.t_beg = idx;
    reg.t_end = idx + 1;  // index bookkeeping unused by the QP builder
    reg.t_start = t;
    reg.duration = h;
    reg.lbias = lbias;
    reg.lskew = 0.0;
    reg.ubias = ubias;
    reg.uskew = 0.0;
    regions.push_back(reg);
    t += h;
    ++idx;
  }
  return regions;
}

TEST(BuildObjective, AllZeroWeightsGiveZeroProblem) {
  const std::vector<Region> regions = contiguous_regions({1.0, 1.0});
  const std::vector<RefLine> lines = {{10.0, 0.0}, {10.0, 10.0}};
  CostWeights weights;
  weights.w1 = weights.w2 = weights.w3 = weights.w4 = weights.w5 = 0.0;
  weights.cruise_speed = 0.0;
  weights.s_end_ref = 0.0;
  const ObjectiveBlock obj = build_objective(regions, lines, weights, 5);
  EXPECT_NEAR(obj.Q.norm(), 0.0, 1e-15);
  EXPECT_NEAR(obj.q.norm(), 0.0, 1e-15);
  EXPECT_NEAR(obj.const_term, 0.0, 1e-15);
}

// Segment-local quadrature so discontinuous random splines integrate the
// correct piece at shared junction endpoints.
double quadrature_cost(const BezierSpline& spline,
                       const std::vector<Region>& regions,
                       const std::vector<RefLine>& lines,
                       const CostWeights& w) {
  double total = 0.0;
  for (size_t k = 0; k < regions.size(); ++k) {
    const Region& reg = regions[k];
    const RefLine& line = lines[k];
    const BezierSegment& seg = spline.segments[k];
    total += testing::simpson(
        [&](double t) {
          const double u =
              std::clamp((t - seg.t_start) / seg.duration, 0.0, 1.0);
          const double sr = line.intercept + line.slope * (t - reg.t_start);
          const double ds = seg.evaluate_local(u, 0) - sr;
          const double dv = seg.evaluate_local(u, 1) - w.cruise_speed;
          const double aa = seg.evaluate_local(u, 2);
          const double jj = seg.evaluate_local(u, 3);
          return w.w1 * ds * ds + w.w2 * dv * dv + w.w3 * aa * aa +
                 w.w4 * jj * jj;
        },
        reg.t_start, reg.end_time(), 2000);
  }
  const double end_dev =
      spline.segments.back().evaluate_local(1.0, 0) - w.s_end_ref;
  return total + w.w5 * end_dev * end_dev;
}

BezierSpline spline_from_x(const Eigen::VectorXd& x,
                           const std::vector<Region>& regions, int n) {
  BezierSpline spline;
  double total = 0.0;
  for (size_t k = 0; k < regions.size(); ++k) {
    BezierSegment seg;
    seg.degree = n;
    seg.duration = regions[k].duration;
    seg.t_start = regions[k].t_start;
    for (int i = 0; i <= n; ++i) {
      seg.control.push_back(x(static_cast<int>(k) * (n + 1) + i) /
                            seg.duration);
    }
    spline.segments.push_back(seg);
    total += seg.duration;
  }
  spline.total_T = total;
  return spline;
}

TEST(BuildObjective, JerkOnlyMatchesQuadrature) {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> coef(-8.0, 8.0);
  const int n = 5;
  const std::vector<Region> regions = contiguous_regions({0.7, 1.0, 0.5});
  const std::vector<RefLine> lines(3, RefLine{0.0, 0.0});
  CostWeights w;
  w.w1 = w.w2 = w.w3 = w.w5 = 0.0;
  w.w4 = 1.0;
  w.cruise_speed = 0.0;
  w.s_end_ref = 0.0;
  const ObjectiveBlock obj = build_objective(regions, lines, w, n);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd x(18);
    for (int i = 0; i < 18; ++i) x(i) = coef(rng);
    const BezierSpline spline = spline_from_x(x, regions, n);
    const double j_mat = x.dot(obj.Q * x) + obj.q.dot(x) + obj.const_term;
    const double j_quad = quadrature_cost(spline, regions, lines, w);
    EXPECT_NEAR(j_mat, j_quad, 1e-6 * std::max(1.0, std::abs(j_quad)));
  }
}

TEST(BuildObjective, FullCostMatchesQuadrature) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> coef(-5.0, 25.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const int n = 5;
  for (int trial = 0; trial < 10; ++trial) {
    const std::vector<double> durations = {0.4 + u01(rng), 0.3 + u01(rng),
                                           0.5 + u01(rng)};
    const std::vector<Region> regions = contiguous_regions(durations);
    std::vector<RefLine> lines;
    for (int k = 0; k < 3; ++k) {
      lines.push_back({-2.0 + 14.0 * u01(rng), 30.0 * u01(rng)});
    }
    CostWeights w;
    w.w1 = u01(rng);
    w.w2 = u01(rng);
    w.w3 = 10.0 * u01(rng);
    w.w4 = 5.0 * u01(rng);
    w.w5 = 3.0 * u01(rng);
    w.cruise_speed = 10.0 * u01(rng);
    w.s_end_ref = 70.0 * u01(rng);
    const ObjectiveBlock obj = build_objective(regions, lines, w, n);

    Eigen::VectorXd x(18);
    for (int i = 0; i < 18; ++i) x(i) = coef(rng);
    const BezierSpline spline = spline_from_x(x, regions, n);
    const double j_mat = x.dot(obj.Q * x) + obj.q.dot(x) + obj.const_term;
    const double j_quad = quadrature_cost(spline, regions, lines, w);
    EXPECT_NEAR(j_mat, j_quad, 1e-6 * std::max(1.0, std::abs(j_quad)))
        << "trial " << trial;
  }
}

TEST(BuildObjective, TrackingCostVanishesOnReferenceLine) {
  const int n = 5;
  const std::vector<Region> regions = contiguous_regions({1.0, 0.8});
  const std::vector<RefLine> lines = {{4.0, 7.0}, {4.0, 11.0}};
  CostWeights w;
  w.w1 = 1.0;
  w.w2 = w.w3 = w.w4 = w.w5 = 0.0;
  const ObjectiveBlock obj = build_objective(regions, lines, w, n);

  Eigen::VectorXd x(12);
  for (size_t k = 0; k < regions.size(); ++k) {
    const double h = regions[k].duration;
    const std::vector<double> p_hat = {lines[k].intercept, lines[k].slope * h,
                                       0, 0, 0, 0};
    const std::vector<double> ctrl = monomial_to_bezier(p_hat);
    for (int i = 0; i <= n; ++i) {
      x(static_cast<int>(k) * (n + 1) + i) = ctrl[static_cast<size_t>(i)];
    }
  }
  const double j = x.dot(obj.Q * x) + obj.q.dot(x) + obj.const_term;
  EXPECT_NEAR(j, 0.0, 1e-9);
}

TEST(BoundaryConstraints, PaperStartState) {
  // s0 = 0, v0 = 10, a0 = 0, n = 5, h = 1: the first three scaled control
  // points must be 0, 2, 4.
  const EqualityBlock block =
      build_boundary_constraints(InitialState{0.0, 10.0, 0.0}, 5, 1.0);
  ASSERT_EQ(block.A.rows(), 3);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(6);
  x(0) = 0.0;
  x(1) = 2.0;
  x(2) = 4.0;
  EXPECT_NEAR((block.A * x - block.b).lpNorm<Eigen::Infinity>(), 0.0, 1e-12);
}

TEST(BoundaryConstraints, RestStateForcesZeroPoints) {
  const EqualityBlock block =
      build_boundary_constraints(InitialState{0.0, 0.0, 0.0}, 5, 1.0);
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(6);
  EXPECT_NEAR((block.A * x - block.b).lpNorm<Eigen::Infinity>(), 0.0, 1e-12);
}

TEST(BoundaryConstraints, DurationScalesTheVelocityGap) {
  // At fixed v0 the required gap between the first two value-level
  // points is v0 * h / n: doubling h doubles the gap.
  for (double h : {0.5, 1.0, 2.0}) {
    const EqualityBlock block =
        build_boundary_constraints(InitialState{0.0, 10.0, 0.0}, 5, h);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(6);
    x(1) = 10.0 * h / 5.0;
    x(2) = 2.0 * x(1);
    EXPECT_NEAR((block.A * x - block.b).lpNorm<Eigen::Infinity>(), 0.0, 1e-12)
        << "h=" << h;
  }
}

// Re-expand a C^2 global polynomial segment-by-segment; the continuity
// rows must accept it and junction evaluations must agree.
TEST(ContinuityConstraints, GlobalPolynomialSatisfiesRows) {
  const int n = 5;
  const std::vector<Region> regions = contiguous_regions({1.0, 2.0});
  const EqualityBlock block = build_continuity_constraints(regions, n);
  ASSERT_EQ(block.A.rows(), 3);

  // s(t) = 3 + 2 t + 0.5 t^2 - 0.1 t^3 + 0.02 t^4 (degree 4 <= n).
  const auto s = [](double t) {
    return 3.0 + 2.0 * t + 0.5 * t * t - 0.1 * t * t * t +
           0.02 * t * t * t * t;
  };
  const auto ds = [](double t) {
    return 2.0 + t - 0.3 * t * t + 0.08 * t * t * t;
  };
  const auto dds = [](double t) { return 1.0 - 0.6 * t + 0.24 * t * t; };
  const auto ddds = [](double t) { return -0.6 + 0.48 * t; };
  const auto dddds = [](double) { return 0.48; };

  Eigen::VectorXd x(12);
  for (size_t k = 0; k < regions.size(); ++k) {
    const double h = regions[k].duration;
    const double t0 = regions[k].t_start;
    // Taylor re-expansion of s at t0 in the normalized variable u.
    std::vector<double> p_hat = {
        s(t0),
        ds(t0) * h,
        dds(t0) * h * h / 2.0,
        ddds(t0) * h * h * h / 6.0,
        dddds(t0) * h * h * h * h / 24.0,
        0.0};
    const std::vector<double> ctrl = monomial_to_bezier(p_hat);
    for (int i = 0; i <= n; ++i) {
      x(static_cast<int>(k) * (n + 1) + i) = ctrl[static_cast<size_t>(i)];
    }
  }
  EXPECT_LT((block.A * x).lpNorm<Eigen::Infinity>(), 1e-9);

  const BezierSpline spline = spline_from_x(x, regions, n);
  for (int l = 0; l <= 2; ++l) {
    const double left = spline.segments[0].evaluate_local(1.0, l);
    const double right = spline.segments[1].evaluate_local(0.0, l);
    EXPECT_NEAR(left, right, 1e-9) << "l=" << l;
  }
}

TEST(ContinuityConstraints, VelocityRowUsesDurationScaling) {
  const int n = 5;
  const std::vector<Region> regions = contiguous_regions({1.0, 2.0});
  const EqualityBlock block = build_continuity_constraints(regions, n);
  // l = 1 row: (n/h_k) on the last pair vs (n/h_{k+1}) on the first pair.
  EXPECT_NEAR(block.A(1, 5), 5.0 / 1.0, 1e-12);
  EXPECT_NEAR(block.A(1, 4), -5.0 / 1.0, 1e-12);
  EXPECT_NEAR(block.A(1, 7), -5.0 / 2.0, 1e-12);
  EXPECT_NEAR(block.A(1, 6), 5.0 / 2.0, 1e-12);
}

TEST(SafetyConstraints, ZeroSkewModesCoincide) {
  const std::vector<Region> regions = contiguous_regions({1.0}, 5.0, 25.0);
  const InequalityBlock trap =
      build_safety_constraints(regions, 5, CorridorMode::kTrapezoidal);
  const InequalityBlock rect =
      build_safety_constraints(regions, 5, CorridorMode::kRectangular);
  EXPECT_NEAR((trap.lower - rect.lower).lpNorm<Eigen::Infinity>(), 0.0, 1e-12);
  EXPECT_NEAR((trap.upper - rect.upper).lpNorm<Eigen::Infinity>(), 0.0, 1e-12);
}

TEST(SafetyConstraints, SteepRegionRectInfeasibleTrapFeasible) {
  Region reg;
  reg.t_beg = 0;
  reg.t_end = 10;
  reg.t_start = 0.0;
  reg.duration = 1.0;
  reg.lbias = 0.0;
  reg.lskew = 2.0;
  reg.ubias = 1.0;
  reg.uskew = 2.0;
  const std::vector<Region> regions = {reg};

  try {
    build_safety_constraints(regions, 5, CorridorMode::kRectangular);
    FAIL() << "expected RectInfeasibleError";
  } catch (const RectInfeasibleError& e) {
    ASSERT_EQ(e.region_indices.size(), 1u);
    EXPECT_EQ(e.region_indices[0], 0);
    EXPECT_NEAR(e.max_feasible_durations[0], 0.5, 1e-12);  // (1-0)/2
  }

  const InequalityBlock trap =
      build_safety_constraints(regions, 5, CorridorMode::kTrapezoidal);
  for (int i = 0; i <= 5; ++i) {
    EXPECT_NEAR(trap.upper(i) - trap.lower(i), 1.0, 1e-12);
    EXPECT_NEAR(trap.lower(i), 2.0 * i / 5.0, 1e-12);
  }
}

TEST(SafetyConstraints, TrapezoidalLoosensBoxesForPositiveSkews) {
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Region reg;
    reg.duration = 0.3 + u01(rng);
    reg.t_start = 0.0;
    reg.lbias = 10.0 * u01(rng);
    reg.ubias = reg.lbias + 5.0 + 10.0 * u01(rng);
    reg.lskew = 6.0 * u01(rng);
    reg.uskew = 6.0 * u01(rng);
    if (reg.ubias + reg.duration * reg.uskew <=
        reg.lbias + reg.duration * reg.lskew) {
      continue;
    }
    const std::vector<Region> regions = {reg};
    const int n = 5;
    const InequalityBlock trap =
        build_safety_constraints(regions, n, CorridorMode::kTrapezoidal);
    InequalityBlock rect;
    try {
      rect = build_safety_constraints(regions, n, CorridorMode::kRectangular);
    } catch (const RectInfeasibleError&) {
      continue;
    }
    for (int i = 0; i <= n; ++i) {
      EXPECT_LE(trap.lower(i), rect.lower(i) + 1e-12);
      EXPECT_GE(trap.upper(i), rect.upper(i) - 1e-12);
    }
    // Nesting: any x inside the rectangular rows is inside the
    // trapezoidal rows.
    Eigen::VectorXd x(n + 1);
    for (int i = 0; i <= n; ++i) {
      x(i) = rect.lower(i) + (rect.upper(i) - rect.lower(i)) * u01(rng);
      EXPECT_GE(x(i), trap.lower(i));
      EXPECT_LE(x(i), trap.upper(i));
    }
  }
}

TEST(PhysicalConstraints, LateralCapExamples) {
  PhysicalLimits limits;
  limits.v_max = 20.0;
  limits.a_cm = 1.5;
  limits.kappa = {0.0};
  EXPECT_DOUBLE_EQ(limits.speed_cap(0), 20.0);  // straight path guard
  limits.kappa = {0.015};
  EXPECT_NEAR(limits.speed_cap(0), 10.0, 1e-12);  // sqrt(1.5 / 0.015)
  limits.kappa = {0.0, 0.015};
  EXPECT_DOUBLE_EQ(limits.speed_cap(0), 20.0);
  EXPECT_NEAR(limits.speed_cap(1), 10.0, 1e-12);
  EXPECT_NEAR(limits.speed_cap(5), 10.0, 1e-12);  // clamped to last entry
}

TEST(PhysicalConstraints, ConstantSpeedSplineHasSlack) {
  const int n = 5;
  const std::vector<Region> regions = contiguous_regions({1.0, 1.0});
  PhysicalLimits limits;  // v_max 20, a in [-4, 3], j in [-10, 10]
  const InequalityBlock block = build_physical_constraints(regions, n, limits);
  ASSERT_EQ(block.A.rows(), 2 * (5 + 4 + 3));

  const double v = 8.0;
  Eigen::VectorXd x(12);
  for (size_t k = 0; k < 2; ++k) {
    const double h = regions[k].duration;
    const double s0 = v * regions[k].t_start;
    for (int i = 0; i <= n; ++i) {
      x(static_cast<int>(k) * 6 + i) = s0 + v * h * i / n;
    }
  }
  const Eigen::VectorXd ax = block.A * x;
  for (int r = 0; r < ax.size(); ++r) {
    EXPECT_GE(ax(r), block.lower(r) - 1e-9);
    EXPECT_LE(ax(r), block.upper(r) + 1e-9);
  }
}

TEST(Assemble, CountsAndProvenance) {
  const int n = 5;
  const std::vector<Region> one = contiguous_regions({1.0});
  const std::vector<RefLine> lines = {{10.0, 0.0}};
  CostWeights w;
  const ObjectiveBlock obj = build_objective(one, lines, w, n);
  EqualityBlock boundary =
      build_boundary_constraints(InitialState{0.0, 10.0, 0.0}, n, 1.0);
  const InequalityBlock safety =
      build_safety_constraints(one, n, CorridorMode::kTrapezoidal);
  const InequalityBlock physical =
      build_physical_constraints(one, n, PhysicalLimits{});
  const QPProblem qp = assemble(6, obj, {boundary}, {safety, physical});

  EXPECT_EQ(qp.dim, 6);
  EXPECT_EQ(qp.A_eq.rows(), 3);
  // 6 two-sided safety boxes (12 one-sided bounds) plus 5 + 4 + 3
  // two-sided physical rows.
  EXPECT_EQ(qp.A_ie.rows(), 6 + 12);
  EXPECT_EQ(qp.eq_provenance.size(), 3u);
  EXPECT_EQ(qp.ie_provenance.size(), 18u);
  EXPECT_NE(qp.debug_dump().find("eq[0] (boundary:s0)"), std::string::npos);
}

TEST(Assemble, TwoRegionsAddContinuityRows) {
  const int n = 5;
  const std::vector<Region> two = contiguous_regions({1.0, 1.0});
  const std::vector<RefLine> lines = {{10.0, 0.0}, {10.0, 10.0}};
  const ObjectiveBlock obj = build_objective(two, lines, CostWeights{}, n);
  EqualityBlock boundary =
      build_boundary_constraints(InitialState{0.0, 10.0, 0.0}, n, 1.0);
  EqualityBlock padded;
  padded.A = Eigen::MatrixXd::Zero(3, 12);
  padded.A.leftCols(6) = boundary.A;
  padded.b = boundary.b;
  padded.provenance = boundary.provenance;
  const EqualityBlock continuity = build_continuity_constraints(two, n);
  const QPProblem qp = assemble(
      12, obj, {padded, continuity},
      {build_safety_constraints(two, n, CorridorMode::kTrapezoidal)});
  EXPECT_EQ(qp.A_eq.rows(), 6);  // 3 boundary + 3 junction rows
}

TEST(Assemble, DuplicateEqualityRowsDropped) {
  const int n = 5;
  const std::vector<Region> one = contiguous_regions({1.0});
  const ObjectiveBlock obj =
      build_objective(one, {{10.0, 0.0}}, CostWeights{}, n);
  EqualityBlock boundary =
      build_boundary_constraints(InitialState{0.0, 10.0, 0.0}, n, 1.0);
  const QPProblem qp = assemble(6, obj, {boundary, boundary}, {});
  EXPECT_EQ(qp.A_eq.rows(), 3);
}

TEST(Assemble, DimensionMismatchThrows) {
  const std::vector<Region> one = contiguous_regions({1.0});
  const ObjectiveBlock obj =
      build_objective(one, {{10.0, 0.0}}, CostWeights{}, 5);
  EXPECT_THROW(assemble(7, obj, {}, {}), DimensionMismatchError);
}

TEST(Objective, SampledRayleighQuotientNonnegative) {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const std::vector<Region> regions = contiguous_regions({0.8, 1.0, 0.6});
  std::vector<RefLine> lines = {{3.0, 0.0}, {5.0, 2.4}, {1.0, 7.4}};
  CostWeights w;
  const ObjectiveBlock obj = build_objective(regions, lines, w, 5);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd x(18);
    for (int i = 0; i < 18; ++i) x(i) = -1.0 + 2.0 * u01(rng);
    x.normalize();
    EXPECT_GE(x.dot(obj.Q * x), -1e-9);
  }
}

}  // namespace
}  // namespace stplan
