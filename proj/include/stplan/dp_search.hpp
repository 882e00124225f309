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

#ifndef STPLAN_DP_SEARCH_HPP_
#define STPLAN_DP_SEARCH_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "stplan/errors.hpp"
#include "stplan/st_graph.hpp"

namespace stplan {

/// Per-transition feasibility limits of the coarse search.
struct DpLimits {
  double v_max = 20.0;  // m/s, per-edge speed bound
  double a_max = 4.0;   // m/s^2, symmetric bound on consecutive-edge accel
};

/// Cost shaping of the DP search. Any fixed scale works since only the
/// argmin matters; these defaults are exposed through the planner config.
struct DpWeights {
  double w_obs = 1.0;   // obstacle proximity
  double w_v = 0.1;     // speed tracking
  double w_a = 0.5;     // acceleration
  double w_end = 1.0;   // terminal station
  double d_safe = 2.0;  // meters, proximity falloff distance
};

/// DP output: station waypoints at dt1 spacing plus the per-interval
/// linear interpolants s^r(t) = slope * (t - t_j) + intercept.
struct HeuristicProfile {
  struct Segment {
    double slope = 0.0;      // m/s
    double intercept = 0.0;  // meters, station at the interval start
  };
  double dt1 = 1.0;
  std::vector<double> stations;  // size = segments.size() + 1
  std::vector<Segment> segments;

  double horizon() const { return dt1 * static_cast<double>(segments.size()); }

  double value_at(double t) const {
    const double T = horizon();
    t = std::clamp(t, 0.0, T);
    int j = static_cast<int>(std::floor(t / dt1));
    j = std::clamp(j, 0, static_cast<int>(segments.size()) - 1);
    const Segment& seg = segments[static_cast<size_t>(j)];
    return seg.intercept + seg.slope * (t - static_cast<double>(j) * dt1);
  }
};

/// Station bounds at fine stamps i * dt2, i = 0..nums-1, covering [0, T].
struct BoundsProfile {
  double dt2 = 0.1;
  int nums = 0;
  std::vector<double> lb;
  std::vector<double> ub;

  double time_at(int i) const { return static_cast<double>(i) * dt2; }
};

namespace detail {

inline double node_proximity_cost(const std::vector<ObstacleTrace>& obstacles,
                                  double t, double s, const DpWeights& w) {
  double cost = 0.0;
  for (const ObstacleTrace& ob : obstacles) {
    if (!ob.covers(t)) continue;
    const double below = ob.s_low(t) - s;
    const double above = s - ob.s_high(t);
    const double dist = std::max({below, above, 0.0});
    const double pen = w.d_safe - dist;
    if (pen > 0.0) cost += w.w_obs * pen * pen;
  }
  return cost;
}

/// Whether the straight S-T segment (t0,s0)->(t1,s1) passes through the
/// obstacle parallelogram. The gap to the lower edge is affine in t, so
/// endpoint values of the clipped window decide it exactly.
inline bool segment_hits_obstacle(double t0, double s0, double t1, double s1,
                                  const ObstacleTrace& ob) {
  const double lo = std::max(t0, ob.t_enter);
  const double hi = std::min(t1, ob.t_exit);
  if (lo > hi) return false;
  const auto path = [&](double t) { return s0 + (s1 - s0) * (t - t0) / (t1 - t0); };
  const double f_lo = path(lo) - ob.s_low(lo);
  const double f_hi = path(hi) - ob.s_low(hi);
  return std::min(f_lo, f_hi) <= ob.block_length + kBlockedEps &&
         std::max(f_lo, f_hi) >= -kBlockedEps;
}

inline bool segment_hits_any(double t0, double s0, double t1, double s1,
                             const std::vector<ObstacleTrace>& obstacles) {
  for (const ObstacleTrace& ob : obstacles) {
    if (segment_hits_obstacle(t0, s0, t1, s1, ob)) return true;
  }
  return false;
}

/// Expected terminal station s0 + v_r * T moved to the nearest station
/// that is inside [0, s_max] and outside every blocked interval at t.
inline double clamp_to_free(double s, const std::vector<ObstacleTrace>& obs,
                            double t, double s_max) {
  s = std::clamp(s, 0.0, s_max);
  const auto blocked = [&](double v) {
    for (const ObstacleTrace& ob : obs) {
      if (ob.covers(t) && v >= ob.s_low(t) - kBlockedEps &&
          v <= ob.s_high(t) + kBlockedEps) {
        return true;
      }
    }
    return false;
  };
  if (!blocked(s)) return s;
  double best = s;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const ObstacleTrace& ob : obs) {
    if (!ob.covers(t)) continue;
    for (double cand : {ob.s_low(t) - 1e-6, ob.s_high(t) + 1e-6}) {
      cand = std::clamp(cand, 0.0, s_max);
      if (blocked(cand)) continue;
      const double d = std::abs(cand - s);
      if (d < best_dist) {
        best_dist = d;
        best = cand;
      }
    }
  }
  return best;
}

}  // namespace detail

/// Minimum-cost monotone path from (0, s0) to the horizon column.
///
/// States carry the incoming step (velocity) in addition to the station
/// row, which keeps the acceleration edge cost Markovian and the search
/// exactly optimal against exhaustive enumeration. Per-edge speed stays
/// within [0, v_max], consecutive-edge acceleration within [-a_max, a_max]
/// (the first edge measured against v0), and edges never cross blocked
/// parallelograms. Ties prefer the larger station.
inline HeuristicProfile search(const STGrid& grid,
                               const std::vector<ObstacleTrace>& obstacles,
                               const InitialState& init, const DpLimits& limits,
                               const DpWeights& weights, double cruise_speed) {
  grid.validate();
  init.validate();
  for (const ObstacleTrace& ob : obstacles) ob.validate(grid.horizon_T);
  if (!(limits.v_max > 0.0) || !(limits.a_max > 0.0)) {
    throw std::invalid_argument("search: limits must be positive");
  }

  const int cols = grid.time_count();
  const int rows = grid.station_count();
  const int row0 = static_cast<int>(std::lround(init.s0 / grid.ds));
  if (row0 < 0 || row0 >= rows) {
    throw std::invalid_argument("search: s0 outside grid");
  }
  if (node_blocked(grid, obstacles, 0, row0)) {
    throw NoFeasiblePathError("search: start node blocked by an obstacle");
  }

  const int max_step = std::max(
      0, static_cast<int>(std::floor(limits.v_max * grid.dt1 / grid.ds + 1e-9)));
  const int max_dstep = static_cast<int>(
      std::floor(limits.a_max * grid.dt1 * grid.dt1 / grid.ds + 1e-9));
  const int n_steps = max_step + 1;
  const double inf = std::numeric_limits<double>::infinity();

  const size_t state_count =
      static_cast<size_t>(cols) * rows * static_cast<size_t>(n_steps);
  if (state_count > (size_t{1} << 25)) {
    throw std::invalid_argument(
        "search: grid resolution yields " + std::to_string(state_count) +
        " DP states; coarsen ds/dt1 or lower v_max");
  }

  // cost[(col*rows + row)*n_steps + step], parent step alongside.
  std::vector<double> cost(state_count, inf);
  std::vector<int16_t> parent(cost.size(), -1);
  const auto idx = [&](int col, int row, int step) {
    return (static_cast<size_t>(col) * rows + row) * n_steps + step;
  };

  // Node costs and blockage per column.
  std::vector<double> node_cost(static_cast<size_t>(cols) * rows, 0.0);
  std::vector<uint8_t> blocked(node_cost.size(), 0);
  for (int c = 0; c < cols; ++c) {
    const double t = grid.time_at(c);
    for (int r = 0; r < rows; ++r) {
      const size_t k = static_cast<size_t>(c) * rows + r;
      if (node_blocked(grid, obstacles, c, r)) {
        blocked[k] = 1;
      } else {
        node_cost[k] =
            detail::node_proximity_cost(obstacles, t, grid.station_at(r), weights);
      }
    }
  }

  const auto edge_cost = [&](double v_prev, double v) {
    const double dv = (v - v_prev) / grid.dt1;
    const double sv = v - cruise_speed;
    return weights.w_v * sv * sv * grid.dt1 + weights.w_a * dv * dv * grid.dt1;
  };
  const double step_v = grid.ds / grid.dt1;  // speed per unit step

  // First column: edges out of the continuous start speed v0.
  {
    const double t0 = grid.time_at(0), t1 = grid.time_at(1);
    const double s_start = grid.station_at(row0);
    for (int step = 0; step <= max_step; ++step) {
      const double v = step * step_v;
      if (std::abs(v - init.v0) > limits.a_max * grid.dt1 + 1e-9) continue;
      const int row = row0 + step;
      if (row >= rows) break;
      const size_t nk = static_cast<size_t>(1) * rows + row;
      if (blocked[nk]) continue;
      if (detail::segment_hits_any(t0, s_start, t1, grid.station_at(row),
                                   obstacles)) {
        continue;
      }
      cost[idx(1, row, step)] = edge_cost(init.v0, v) + node_cost[nk];
      parent[idx(1, row, step)] = 0;
    }
  }

  for (int c = 2; c < cols; ++c) {
    const double t_prev = grid.time_at(c - 1), t = grid.time_at(c);
    for (int r_prev = 0; r_prev < rows; ++r_prev) {
      for (int step_in = 0; step_in <= max_step; ++step_in) {
        const double base = cost[idx(c - 1, r_prev, step_in)];
        if (!std::isfinite(base)) continue;
        const int lo = std::max(0, step_in - max_dstep);
        const int hi = std::min(max_step, step_in + max_dstep);
        for (int step = lo; step <= hi; ++step) {
          const int row = r_prev + step;
          if (row >= rows) break;
          const size_t nk = static_cast<size_t>(c) * rows + row;
          if (blocked[nk]) continue;
          if (detail::segment_hits_any(t_prev, grid.station_at(r_prev), t,
                                       grid.station_at(row), obstacles)) {
            continue;
          }
          const double total =
              base + edge_cost(step_in * step_v, step * step_v) + node_cost[nk];
          double& slot = cost[idx(c, row, step)];
          if (total <= slot) {
            slot = total;
            parent[idx(c, row, step)] = static_cast<int16_t>(step_in);
          }
        }
      }
    }
  }

  // Terminal choice: lowest cost + terminal station cost, larger s on ties.
  const double t_end = grid.time_at(cols - 1);
  const double s_expected = detail::clamp_to_free(
      init.s0 + cruise_speed * grid.horizon_T, obstacles, t_end, grid.s_max);
  int best_row = -1, best_step = -1;
  double best_total = inf;
  for (int r = 0; r < rows; ++r) {
    for (int step = 0; step <= max_step; ++step) {
      const double base = cost[idx(cols - 1, r, step)];
      if (!std::isfinite(base)) continue;
      const double dev = grid.station_at(r) - s_expected;
      const double total = base + weights.w_end * dev * dev;
      if (total < best_total ||
          (total == best_total &&
           (r > best_row || (r == best_row && step > best_step)))) {
        best_total = total;
        best_row = r;
        best_step = step;
      }
    }
  }
  if (best_row < 0) {
    throw NoFeasiblePathError("search: no feasible path reaches the horizon");
  }

  std::vector<int> path_rows(static_cast<size_t>(cols));
  int row = best_row, step = best_step;
  for (int c = cols - 1; c >= 1; --c) {
    path_rows[static_cast<size_t>(c)] = row;
    const int prev_step = parent[idx(c, row, step)];
    row -= step;
    step = prev_step;
  }
  path_rows[0] = row0;

  HeuristicProfile profile;
  profile.dt1 = grid.dt1;
  profile.stations.reserve(static_cast<size_t>(cols));
  for (int c = 0; c < cols; ++c) {
    profile.stations.push_back(grid.station_at(path_rows[static_cast<size_t>(c)]));
  }
  profile.segments.reserve(static_cast<size_t>(cols) - 1);
  for (int c = 0; c + 1 < cols; ++c) {
    HeuristicProfile::Segment seg;
    seg.intercept = profile.stations[static_cast<size_t>(c)];
    seg.slope = (profile.stations[static_cast<size_t>(c) + 1] - seg.intercept) /
                grid.dt1;
    profile.segments.push_back(seg);
  }
  return profile;
}

/// Per-fine-stamp station bounds with the non-chosen side of every
/// obstacle discarded. Each obstacle is classified above/below from the
/// heuristic interpolant, then its discarded side tightens lb or ub at
/// all stamps of the obstacle window extended by one dt2 on each side.
/// The one-stamp extension closes the sampling gap at window corners, so
/// the piecewise-linear interpolation of lb/ub never admits a point of
/// the original parallelogram.
inline BoundsProfile extract_bounds(const HeuristicProfile& profile,
                                    const std::vector<ObstacleTrace>& obstacles,
                                    double dt2, double s_max) {
  if (!(dt2 > 0.0)) {
    throw std::invalid_argument("extract_bounds: dt2 must be positive");
  }
  const double ratio = profile.dt1 / dt2;
  if (std::abs(ratio - std::lround(ratio)) > 1e-9 || std::lround(ratio) < 1) {
    throw std::invalid_argument("extract_bounds: dt2 must divide dt1");
  }
  const double T = profile.horizon();
  const int nums = static_cast<int>(std::lround(T / dt2)) + 1;

  BoundsProfile bounds;
  bounds.dt2 = dt2;
  bounds.nums = nums;
  bounds.lb.assign(static_cast<size_t>(nums), 0.0);
  bounds.ub.assign(static_cast<size_t>(nums), s_max);

  for (const ObstacleTrace& ob : obstacles) {
    // Side decision: where does the interpolant sit relative to the
    // obstacle center over its window?
    double acc = 0.0;
    int n_in = 0;
    for (int i = 0; i < nums; ++i) {
      const double t = bounds.time_at(i);
      if (!ob.covers(t)) continue;
      acc += profile.value_at(t) - 0.5 * (ob.s_low(t) + ob.s_high(t));
      ++n_in;
    }
    if (n_in == 0) {
      const double tc = 0.5 * (ob.t_enter + ob.t_exit);
      acc = profile.value_at(tc) - 0.5 * (ob.s_low(tc) + ob.s_high(tc));
    }
    const bool above = acc >= 0.0;

    for (int i = 0; i < nums; ++i) {
      const double t = bounds.time_at(i);
      if (t < ob.t_enter - dt2 - 1e-12 || t > ob.t_exit + dt2 + 1e-12) continue;
      if (above) {
        bounds.lb[static_cast<size_t>(i)] =
            std::max(bounds.lb[static_cast<size_t>(i)], ob.s_high(t));
      } else {
        bounds.ub[static_cast<size_t>(i)] =
            std::min(bounds.ub[static_cast<size_t>(i)], ob.s_low(t));
      }
    }
  }

  for (int i = 0; i < nums; ++i) {
    bounds.lb[static_cast<size_t>(i)] =
        std::max(bounds.lb[static_cast<size_t>(i)], 0.0);
    bounds.ub[static_cast<size_t>(i)] =
        std::min(bounds.ub[static_cast<size_t>(i)], s_max);
    if (bounds.ub[static_cast<size_t>(i)] - bounds.lb[static_cast<size_t>(i)] <
        1e-9) {
      throw EmptyIntervalError(
          "extract_bounds: conflicting obstacle sides leave no free station "
          "at t = " +
              std::to_string(bounds.time_at(i)),
          i, bounds.time_at(i));
    }
  }
  return bounds;
}

}  // namespace stplan

#endif  // STPLAN_DP_SEARCH_HPP_
