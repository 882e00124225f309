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

#ifndef STPLAN_CORRIDOR_HPP_
#define STPLAN_CORRIDOR_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "stplan/dp_search.hpp"
#include "stplan/errors.hpp"

namespace stplan {

/// One convex trapezoidal safe region on the S-T plane: the band between
/// two lines over [t_start, t_start + duration],
///   lbias + lskew * (t - t_start)  <  ubias + uskew * (t - t_start).
/// t_beg/t_end index the fine stamps of the BoundsProfile it came from.
struct Region {
  int t_beg = 0;
  int t_end = 0;
  double t_start = 0.0;   // seconds, = t_beg * dt2
  double duration = 0.0;  // seconds, = (t_end - t_beg) * dt2
  double lbias = 0.0;     // meters, lower line at t_start
  double lskew = 0.0;     // m/s
  double ubias = 0.0;     // meters, upper line at t_start
  double uskew = 0.0;     // m/s

  double lower_at(double t) const { return lbias + lskew * (t - t_start); }
  double upper_at(double t) const { return ubias + uskew * (t - t_start); }
  double end_time() const { return t_start + duration; }
};

/// Containment/separation report of validate_regions.
struct RegionSafetyReport {
  enum class Kind { kLowerBelowBound, kUpperAboveBound, kSeparation, kGap };
  struct Violation {
    Kind kind;
    int region = 0;
    int stamp = 0;      // fine-stamp index (kGap/kSeparation use t_beg)
    double amount = 0;  // meters
  };
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

namespace detail {

inline Region construct_region(const BoundsProfile& b, int i) {
  Region reg;
  reg.t_beg = i;
  reg.t_start = b.time_at(i);
  reg.lbias = b.lb[static_cast<size_t>(i)];
  reg.lskew =
      (b.lb[static_cast<size_t>(i) + 1] - b.lb[static_cast<size_t>(i)]) / b.dt2;
  reg.ubias = b.ub[static_cast<size_t>(i)];
  reg.uskew =
      (b.ub[static_cast<size_t>(i) + 1] - b.ub[static_cast<size_t>(i)]) / b.dt2;
  return reg;
}

inline void close_region(Region* reg, const BoundsProfile& b, int end) {
  reg->t_end = end;
  reg->duration = (end - reg->t_beg) * b.dt2;
}

}  // namespace detail

/// Piecewise convex region generation: sweep the fine-stamp bounds and
/// open a new region wherever either boundary skew moves by more than
/// eps from the region's own skew. The closing region ends one stamp
/// before the deviating sample so every sample a region covers lies on
/// its boundary lines (up to eps drift), keeping the band inside the
/// sampled safe set.
inline std::vector<Region> generate_regions(const BoundsProfile& bounds,
                                            double eps) {
  if (bounds.nums < 2 ||
      bounds.lb.size() != static_cast<size_t>(bounds.nums) ||
      bounds.ub.size() != static_cast<size_t>(bounds.nums)) {
    throw DegenerateBoundsError("generate_regions: need at least 2 samples");
  }
  if (!(eps > 0.0)) {
    throw std::invalid_argument("generate_regions: eps must be positive");
  }

  std::vector<Region> regions;
  Region current = detail::construct_region(bounds, 0);
  for (int i = 2; i < bounds.nums; ++i) {
    const double lskew =
        (bounds.lb[static_cast<size_t>(i)] - bounds.lb[static_cast<size_t>(i) - 1]) /
        bounds.dt2;
    const double uskew =
        (bounds.ub[static_cast<size_t>(i)] - bounds.ub[static_cast<size_t>(i) - 1]) /
        bounds.dt2;
    if (std::abs(lskew - current.lskew) > eps ||
        std::abs(uskew - current.uskew) > eps) {
      detail::close_region(&current, bounds, i - 1);
      regions.push_back(current);
      current = detail::construct_region(bounds, i - 1);
    }
  }
  detail::close_region(&current, bounds, bounds.nums - 1);
  regions.push_back(current);
  return regions;
}

/// Splits every region longer than max_duration into pieces on the same
/// boundary lines, re-anchoring the biases at each new start. Pieces are
/// max_duration long with one shorter remainder at the end.
inline std::vector<Region> region_split(const std::vector<Region>& regions,
                                        double dt2,
                                        double max_duration = 1.0) {
  const int cap =
      std::max(1, static_cast<int>(std::floor(max_duration / dt2 + 1e-9)));
  std::vector<Region> out;
  for (const Region& reg : regions) {
    const int len = reg.t_end - reg.t_beg;
    if (len <= cap) {
      out.push_back(reg);
      continue;
    }
    for (int b = reg.t_beg; b < reg.t_end; b += cap) {
      const int e = std::min(reg.t_end, b + cap);
      Region piece = reg;
      piece.t_beg = b;
      piece.t_end = e;
      piece.t_start = b * dt2;
      piece.duration = (e - b) * dt2;
      piece.lbias = reg.lower_at(piece.t_start);
      piece.ubias = reg.upper_at(piece.t_start);
      out.push_back(piece);
    }
  }
  return out;
}

namespace detail {

struct SupportLine {
  double bias = 0.0;  // value at t_ref
  double skew = 0.0;
};

/// Tightest line dominating a set of (t, v) requirements from the given
/// side: the minimal-area line with L(t_i) >= v_i for all i (sign +1),
/// or the maximal-area line with L(t_i) <= v_i (sign -1). The optimum of
/// this tiny LP is supported by two of the points, so enumerating pairs
/// is exact.
inline SupportLine tightest_line(const std::vector<std::pair<double, double>>& pts,
                                 double t_ref, double t_mid, double sign) {
  SupportLine best;
  double best_mid = std::numeric_limits<double>::infinity();
  bool found = false;
  for (size_t i = 0; i < pts.size(); ++i) {
    for (size_t j = 0; j < pts.size(); ++j) {
      if (i == j) continue;
      const double dt = pts[j].first - pts[i].first;
      if (std::abs(dt) < 1e-12) continue;
      const double skew = (pts[j].second - pts[i].second) / dt;
      const double bias =
          pts[i].second + skew * (t_ref - pts[i].first);
      bool dominates = true;
      for (const auto& [t, v] : pts) {
        const double val = bias + skew * (t - t_ref);
        if (sign * (val - v) < -1e-9) {
          dominates = false;
          break;
        }
      }
      if (!dominates) continue;
      const double mid = sign * (bias + skew * (t_mid - t_ref));
      if (!found || mid < best_mid) {
        best_mid = mid;
        best = {bias, skew};
        found = true;
      }
    }
  }
  if (!found) {
    // Degenerate geometry; fall back to a flat envelope.
    double extreme = pts.front().second;
    for (const auto& [t, v] : pts) {
      extreme = (sign > 0) ? std::max(extreme, v) : std::min(extreme, v);
    }
    best = {extreme, 0.0};
  }
  return best;
}

/// Merge of two adjacent regions. The merged boundaries are the
/// least-lift supporting lines of the two old boundaries (evaluated at
/// their window endpoints), so the merged band is contained in both old
/// bands wherever they applied while giving up as little width as the
/// line family allows.
inline Region merge_pair(const Region& a, const Region& b, double dt2) {
  Region merged;
  merged.t_beg = std::min(a.t_beg, b.t_beg);
  merged.t_end = std::max(a.t_end, b.t_end);
  merged.t_start = merged.t_beg * dt2;
  merged.duration = (merged.t_end - merged.t_beg) * dt2;
  const double t_mid = merged.t_start + 0.5 * merged.duration;

  std::vector<std::pair<double, double>> lower_pts, upper_pts;
  for (const Region* r : {&a, &b}) {
    for (const double t : {r->t_start, r->end_time()}) {
      lower_pts.emplace_back(t, r->lower_at(t));
      upper_pts.emplace_back(t, r->upper_at(t));
    }
  }
  const SupportLine lo =
      tightest_line(lower_pts, merged.t_start, t_mid, +1.0);
  const SupportLine hi =
      tightest_line(upper_pts, merged.t_start, t_mid, -1.0);
  merged.lbias = lo.bias;
  merged.lskew = lo.skew;
  merged.ubias = hi.bias;
  merged.uskew = hi.skew;
  return merged;
}

inline bool strictly_separated(const Region& r, double min_gap) {
  return r.upper_at(r.t_start) - r.lower_at(r.t_start) > min_gap &&
         r.upper_at(r.end_time()) - r.lower_at(r.end_time()) > min_gap;
}

}  // namespace detail

/// Absorbs regions shorter than min_duration into the temporal neighbor
/// whose lower skew is closer (earlier neighbor on ties). A merge that
/// would collapse the band falls back to the other neighbor, and a short
/// region stays as-is when no neighbor can take it.
inline std::vector<Region> region_merge(const std::vector<Region>& regions,
                                        double dt2,
                                        double min_duration = 0.2) {
  const double min_gap = 1e-9;
  std::vector<Region> out = regions;
  std::vector<char> frozen(out.size(), 0);
  bool changed = true;
  while (changed && out.size() > 1) {
    changed = false;
    for (size_t k = 0; k < out.size(); ++k) {
      if (frozen[k]) continue;
      if (out[k].duration >= min_duration - 1e-12) continue;

      std::vector<size_t> neighbors;
      if (k > 0) neighbors.push_back(k - 1);
      if (k + 1 < out.size()) neighbors.push_back(k + 1);
      std::stable_sort(neighbors.begin(), neighbors.end(),
                       [&](size_t x, size_t y) {
                         return std::abs(out[x].lskew - out[k].lskew) <
                                std::abs(out[y].lskew - out[k].lskew);
                       });
      bool merged_ok = false;
      for (const size_t nb : neighbors) {
        const Region cand = detail::merge_pair(out[k], out[nb], dt2);
        if (!detail::strictly_separated(cand, min_gap)) continue;
        const size_t lo = std::min(k, nb);
        out[lo] = cand;
        out.erase(out.begin() + static_cast<long>(std::max(k, nb)));
        frozen.assign(out.size(), 0);  // neighborhoods changed, rescan all
        merged_ok = true;
        break;
      }
      if (merged_ok) {
        changed = true;
        break;
      }
      frozen[k] = 1;  // unmergeable; keep it rather than loop forever
    }
  }
  return out;
}

/// Confirms every region band lies inside [lb, ub] at every fine stamp it
/// covers and that the lines stay strictly separated at both region ends.
/// Also reports stamp-index gaps/overlaps between consecutive regions.
/// Never throws; violations come back in the report.
inline RegionSafetyReport validate_regions(const std::vector<Region>& regions,
                                           const BoundsProfile& bounds,
                                           double tol = 1e-6) {
  RegionSafetyReport report;
  using Kind = RegionSafetyReport::Kind;
  for (size_t k = 0; k < regions.size(); ++k) {
    const Region& reg = regions[k];
    for (int i = reg.t_beg; i <= reg.t_end && i < bounds.nums; ++i) {
      const double t = bounds.time_at(i);
      const double lo = reg.lower_at(t);
      const double hi = reg.upper_at(t);
      if (lo < bounds.lb[static_cast<size_t>(i)] - tol) {
        report.violations.push_back({Kind::kLowerBelowBound,
                                     static_cast<int>(k), i,
                                     bounds.lb[static_cast<size_t>(i)] - lo});
      }
      if (hi > bounds.ub[static_cast<size_t>(i)] + tol) {
        report.violations.push_back({Kind::kUpperAboveBound,
                                     static_cast<int>(k), i,
                                     hi - bounds.ub[static_cast<size_t>(i)]});
      }
    }
    for (const double t : {reg.t_start, reg.end_time()}) {
      const double gap = reg.upper_at(t) - reg.lower_at(t);
      if (!(gap > 0.0)) {
        report.violations.push_back(
            {Kind::kSeparation, static_cast<int>(k), reg.t_beg, -gap});
        break;
      }
    }
    if (k > 0 && regions[k - 1].t_end != reg.t_beg) {
      report.violations.push_back(
          {Kind::kGap, static_cast<int>(k), reg.t_beg,
           static_cast<double>(reg.t_beg - regions[k - 1].t_end)});
    }
  }
  return report;
}

}  // namespace stplan

#endif  // STPLAN_CORRIDOR_HPP_
