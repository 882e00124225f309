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

#ifndef STPLAN_ST_GRAPH_HPP_
#define STPLAN_ST_GRAPH_HPP_

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stplan/errors.hpp"

namespace stplan {

// Boundary points count as blocked; expanding the closed interval by this
// much keeps float noise on the conservative side.
inline constexpr double kBlockedEps = 1e-9;

/// One predicted obstacle projected onto the S-T plane: a parallelogram
/// with linear lower/upper station bounds over [t_enter, t_exit].
struct ObstacleTrace {
  double t_enter = 0.0;       // seconds
  double t_exit = 0.0;        // seconds
  double s_at_enter = 0.0;    // meters, lower edge at t_enter
  double speed = 0.0;         // m/s, constant over the window
  double block_length = 0.0;  // meters, side along the s axis

  double s_low(double t) const { return s_at_enter + speed * (t - t_enter); }
  double s_high(double t) const { return s_low(t) + block_length; }

  bool covers(double t) const { return t >= t_enter && t <= t_exit; }

  void validate(double horizon_T) const {
    if (!(t_enter >= 0.0) || !(t_enter < t_exit) || !(t_exit <= horizon_T)) {
      throw std::invalid_argument(
          "ObstacleTrace: need 0 <= t_enter < t_exit <= horizon");
    }
    if (!(block_length > 0.0)) {
      throw std::invalid_argument("ObstacleTrace: block_length must be > 0");
    }
  }
};

/// Blocked station interval [s_low(t), s_high(t)] of one obstacle at time
/// t, or absent when t is outside the obstacle's window.
inline std::optional<std::pair<double, double>> blocked_interval(
    const ObstacleTrace& obstacle, double t) {
  if (!obstacle.covers(t)) {
    return std::nullopt;
  }
  return std::make_pair(obstacle.s_low(t), obstacle.s_high(t));
}

/// Discretization of the S-T plane for the coarse DP search. Nodes sit at
/// (i * dt1, j * ds) for i = 0..time_steps, j = 0..station_steps.
struct STGrid {
  double horizon_T = 7.0;  // seconds, exact multiple of dt1
  double dt1 = 1.0;        // seconds, coarse DP time step
  double ds = 0.5;         // meters, station step
  double s_max = 140.0;    // meters

  int time_steps() const {
    return static_cast<int>(std::lround(horizon_T / dt1));
  }
  int time_count() const { return time_steps() + 1; }
  int station_count() const {
    return static_cast<int>(std::floor(s_max / ds + 1e-9)) + 1;
  }
  double time_at(int i) const { return static_cast<double>(i) * dt1; }
  double station_at(int j) const { return static_cast<double>(j) * ds; }

  void validate() const {
    if (!(dt1 > 0.0) || !(ds > 0.0) || !(s_max > 0.0) || !(horizon_T > 0.0)) {
      throw std::invalid_argument("STGrid: all steps must be positive");
    }
    const double steps = horizon_T / dt1;
    if (std::abs(steps - std::lround(steps)) > 1e-9) {
      throw std::invalid_argument(
          "STGrid: horizon_T must be an exact multiple of dt1");
    }
  }
};

/// Fixed start of the speed profile.
struct InitialState {
  double s0 = 0.0;  // meters
  double v0 = 0.0;  // m/s, >= 0
  double a0 = 0.0;  // m/s^2

  void validate() const {
    if (!(v0 >= 0.0)) {
      throw std::invalid_argument("InitialState: v0 must be >= 0");
    }
  }
};

/// Whether grid node (t_i, s_j) lies inside any obstacle's closed blocked
/// interval at that time.
inline bool node_blocked(const STGrid& grid,
                         const std::vector<ObstacleTrace>& obstacles,
                         int t_index, int s_index) {
  const double t = grid.time_at(t_index);
  const double s = grid.station_at(s_index);
  for (const ObstacleTrace& ob : obstacles) {
    if (ob.covers(t) && s >= ob.s_low(t) - kBlockedEps &&
        s <= ob.s_high(t) + kBlockedEps) {
      return true;
    }
  }
  return false;
}

/// An obstacle whose station bounds are arbitrary (e.g. constant
/// acceleration) rather than linear. lower/upper give the blocked
/// interval edges as functions of time on [t_enter, t_exit].
struct NonlinearBoundary {
  double t_enter = 0.0;
  double t_exit = 0.0;
  std::function<double(double)> lower;
  std::function<double(double)> upper;
};

/// Conservative piecewise-linear over-approximation of a nonlinear
/// obstacle: one ObstacleTrace per sample interval whose parallelogram
/// contains the true blocked region on that interval. Secant chords are
/// pushed outward by the largest deviation found on a dense verification
/// grid (plus a small pad), so the output region is a superset of the
/// input region. Throws LinearizationError if a piece would block the
/// whole station range [0, s_max].
inline std::vector<ObstacleTrace> linearize_boundaries(
    const NonlinearBoundary& boundary, double sample_dt, double s_max) {
  if (!(sample_dt > 0.0) || !(boundary.t_exit > boundary.t_enter)) {
    throw std::invalid_argument("linearize_boundaries: bad time window");
  }
  if (!boundary.lower || !boundary.upper) {
    throw std::invalid_argument("linearize_boundaries: missing bound fn");
  }
  constexpr int kDenseSteps = 4096;
  constexpr double kPad = 1e-9;

  std::vector<ObstacleTrace> pieces;
  const double window = boundary.t_exit - boundary.t_enter;
  const int n_pieces =
      std::max(1, static_cast<int>(std::ceil(window / sample_dt - 1e-9)));
  for (int k = 0; k < n_pieces; ++k) {
    const double t0 = boundary.t_enter + k * sample_dt;
    const double t1 = std::min(boundary.t_exit, t0 + sample_dt);
    const double slope =
        (boundary.lower(t1) - boundary.lower(t0)) / (t1 - t0);

    // Largest outward corrections so the parallel chord pair encloses
    // both true bounds everywhere on the piece.
    double low_shift = 0.0;   // move lower chord down by this much
    double high_anchor = boundary.upper(t0);  // upper support at t0
    for (int i = 0; i <= kDenseSteps; ++i) {
      const double t = t0 + (t1 - t0) * i / kDenseSteps;
      const double chord = boundary.lower(t0) + slope * (t - t0);
      low_shift = std::max(low_shift, chord - boundary.lower(t));
      high_anchor =
          std::max(high_anchor, boundary.upper(t) - slope * (t - t0));
    }
    ObstacleTrace piece;
    piece.t_enter = t0;
    piece.t_exit = t1;
    piece.s_at_enter = boundary.lower(t0) - low_shift - kPad;
    piece.speed = slope;
    piece.block_length = (high_anchor + kPad) - piece.s_at_enter;

    // Reject envelopes that leave no free station anywhere in the piece.
    for (const double t : {t0, t1}) {
      if (piece.s_low(t) <= 0.0 && piece.s_high(t) >= s_max) {
        throw LinearizationError(
            "linearize_boundaries: piece blocks the entire station range "
            "at t = " +
            std::to_string(t));
      }
    }
    pieces.push_back(piece);
  }
  return pieces;
}

}  // namespace stplan

#endif  // STPLAN_ST_GRAPH_HPP_
