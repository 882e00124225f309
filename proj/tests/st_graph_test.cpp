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

#include "stplan/st_graph.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace stplan {
namespace {

TEST(BlockedInterval, StationaryObstacle) {
  const ObstacleTrace ob{0.0, 7.0, 10.0, 0.0, 5.0};
  const auto interval = blocked_interval(ob, 3.0);
  ASSERT_TRUE(interval.has_value());
  EXPECT_DOUBLE_EQ(interval->first, 10.0);
  EXPECT_DOUBLE_EQ(interval->second, 15.0);
}

TEST(BlockedInterval, OutsideWindowIsAbsent) {
  const ObstacleTrace ob{1.0, 5.0, 0.0, 4.0, 6.0};
  EXPECT_FALSE(blocked_interval(ob, 0.5).has_value());
  EXPECT_TRUE(blocked_interval(ob, 1.0).has_value());
  EXPECT_TRUE(blocked_interval(ob, 5.0).has_value());
  EXPECT_FALSE(blocked_interval(ob, 5.01).has_value());
}

TEST(BlockedInterval, MovingObstacle) {
  const ObstacleTrace ob{1.0, 5.0, 0.0, 4.0, 6.0};
  const auto interval = blocked_interval(ob, 3.0);
  ASSERT_TRUE(interval.has_value());
  EXPECT_DOUBLE_EQ(interval->first, 8.0);   // 0 + 4 * (3 - 1)
  EXPECT_DOUBLE_EQ(interval->second, 14.0);
}

TEST(BlockedInterval, SidePreservedAndSpeedMonotone) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    ObstacleTrace ob;
    ob.t_enter = 5.0 * u01(rng);
    ob.t_exit = ob.t_enter + 0.5 + 2.0 * u01(rng);
    ob.s_at_enter = 50.0 * u01(rng);
    ob.speed = -5.0 + 20.0 * u01(rng);
    ob.block_length = 1.0 + 7.0 * u01(rng);
    const double t = ob.t_enter + (ob.t_exit - ob.t_enter) * u01(rng);
    const auto iv = blocked_interval(ob, t);
    ASSERT_TRUE(iv.has_value());
    EXPECT_NEAR(iv->second - iv->first, ob.block_length, 1e-12);

    ObstacleTrace faster = ob;
    faster.speed += 1.5;
    const auto iv2 = blocked_interval(faster, t);
    const double shift = 1.5 * (t - ob.t_enter);
    EXPECT_NEAR(iv2->first - iv->first, shift, 1e-12);
    EXPECT_NEAR(iv2->second - iv->second, shift, 1e-12);
  }
}

TEST(ObstacleValidate, RejectsBadWindows) {
  EXPECT_THROW((ObstacleTrace{-0.5, 2.0, 0.0, 0.0, 1.0}).validate(7.0),
               std::invalid_argument);
  EXPECT_THROW((ObstacleTrace{2.0, 2.0, 0.0, 0.0, 1.0}).validate(7.0),
               std::invalid_argument);
  EXPECT_THROW((ObstacleTrace{0.0, 8.0, 0.0, 0.0, 1.0}).validate(7.0),
               std::invalid_argument);
  EXPECT_THROW((ObstacleTrace{0.0, 2.0, 0.0, 0.0, 0.0}).validate(7.0),
               std::invalid_argument);
}

TEST(NodeBlocked, EmptyListNeverBlocks) {
  STGrid grid;
  EXPECT_FALSE(node_blocked(grid, {}, 3, 10));
}

TEST(NodeBlocked, InteriorAndBoundary) {
  STGrid grid;  // dt1 = 1, ds = 0.5
  const std::vector<ObstacleTrace> stationary = {{0.0, 7.0, 10.0, 0.0, 5.0}};
  EXPECT_TRUE(node_blocked(grid, stationary, 2, 24));   // (2 s, 12 m)
  EXPECT_FALSE(node_blocked(grid, stationary, 2, 19));  // (2 s, 9.5 m)

  const std::vector<ObstacleTrace> moving = {{1.0, 5.0, 0.0, 4.0, 6.0}};
  // s_high(3) = 14: boundary inclusion.
  EXPECT_TRUE(node_blocked(grid, moving, 3, 28));
  EXPECT_FALSE(node_blocked(grid, moving, 3, 29));
}

TEST(STGridValidate, HorizonMustBeMultipleOfStep) {
  STGrid grid;
  grid.horizon_T = 7.3;
  EXPECT_THROW(grid.validate(), std::invalid_argument);
  grid.horizon_T = 7.0;
  EXPECT_NO_THROW(grid.validate());
  EXPECT_EQ(grid.time_count(), 8);
}

TEST(Linearize, LinearBoundsPassThrough) {
  NonlinearBoundary input;
  input.t_enter = 0.0;
  input.t_exit = 2.0;
  input.lower = [](double t) { return 5.0 + 3.0 * t; };
  input.upper = [](double t) { return 11.0 + 3.0 * t; };
  const std::vector<ObstacleTrace> out = linearize_boundaries(input, 2.0, 100.0);
  ASSERT_EQ(out.size(), 1u);
  for (double t : {0.0, 0.5, 1.0, 2.0}) {
    EXPECT_NEAR(out[0].s_low(t), 5.0 + 3.0 * t, 1e-8);
    EXPECT_NEAR(out[0].s_high(t), 11.0 + 3.0 * t, 1e-8);
  }
}

TEST(Linearize, ParabolaIsConservative) {
  NonlinearBoundary input;
  input.t_enter = 0.0;
  input.t_exit = 2.0;
  const double L = 4.0;
  input.lower = [](double t) { return t * t; };
  input.upper = [L](double t) { return t * t + L; };
  const std::vector<ObstacleTrace> out = linearize_boundaries(input, 1.0, 100.0);
  ASSERT_EQ(out.size(), 2u);
  // Containment at a 1 ms verification grid: the output region covers
  // the true region everywhere.
  for (int k = 0; k <= 2000; ++k) {
    const double t = k / 1000.0;
    for (const ObstacleTrace& piece : out) {
      if (!piece.covers(t)) continue;
      EXPECT_LE(piece.s_low(t), t * t + 1e-12);
      EXPECT_GE(piece.s_high(t), t * t + L - 1e-12);
    }
    // Every time instant is covered by some piece.
    bool covered = false;
    for (const ObstacleTrace& piece : out) covered |= piece.covers(t);
    EXPECT_TRUE(covered);
  }
}

TEST(Linearize, ConstantAccelerationObstacle) {
  NonlinearBoundary input;
  input.t_enter = 0.0;
  input.t_exit = 2.0;
  input.lower = [](double t) { return 5.0 + 2.0 * t + 0.5 * t * t; };
  input.upper = [](double t) { return 10.0 + 2.0 * t + 0.5 * t * t; };
  const std::vector<ObstacleTrace> out = linearize_boundaries(input, 1.0, 100.0);
  ASSERT_EQ(out.size(), 2u);
  for (int k = 0; k <= 2000; ++k) {
    const double t = k / 1000.0;
    const double lo = 5.0 + 2.0 * t + 0.5 * t * t;
    const double hi = lo + 5.0;
    for (const ObstacleTrace& piece : out) {
      if (!piece.covers(t)) continue;
      EXPECT_LE(piece.s_low(t), lo + 1e-12);
      EXPECT_GE(piece.s_high(t), hi - 1e-12);
    }
  }
}

TEST(Linearize, RejectsFullBlockage) {
  NonlinearBoundary input;
  input.t_enter = 0.0;
  input.t_exit = 1.0;
  input.lower = [](double) { return -1.0; };
  input.upper = [](double) { return 200.0; };
  EXPECT_THROW(linearize_boundaries(input, 1.0, 100.0), LinearizationError);
}

TEST(Linearize, RejectsBadInputs) {
  NonlinearBoundary input;
  input.t_enter = 1.0;
  input.t_exit = 1.0;
  input.lower = [](double) { return 0.0; };
  input.upper = [](double) { return 1.0; };
  EXPECT_THROW(linearize_boundaries(input, 1.0, 100.0), std::invalid_argument);
}

}  // namespace
}  // namespace stplan
