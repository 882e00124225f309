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

#ifndef STPLAN_EXPORT_HPP_
#define STPLAN_EXPORT_HPP_

#include <cstdio>
#include <ostream>
#include <string>

#include "stplan/planner.hpp"

namespace stplan {

// CSV exports: one-line headers, SI units, 10 significant digits (the
// profile rows must reproduce evaluate() to 1e-9 relative, which 9
// digits cannot guarantee at the rounding boundary).

namespace detail {

inline std::string fmt9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace detail

/// Sampled profile rows (t, s, v, a, j) at sample_dt spacing; exactly
/// floor(T / sample_dt) + 1 rows with strictly increasing t.
inline void write_profile_csv(std::ostream& os, const BezierSpline& spline,
                              double sample_dt) {
  os << "t,s,v,a,j\n";
  const double T = spline.total_T;
  const int rows = static_cast<int>(std::floor(T / sample_dt + 1e-9));
  for (int i = 0; i <= rows; ++i) {
    const double t = std::min(static_cast<double>(i) * sample_dt, T);
    os << detail::fmt9(t) << ',' << detail::fmt9(spline.evaluate(t, 0)) << ','
       << detail::fmt9(spline.evaluate(t, 1)) << ','
       << detail::fmt9(spline.evaluate(t, 2)) << ','
       << detail::fmt9(spline.evaluate(t, 3)) << '\n';
  }
}

/// Corridor dump: one row per region with its band line parameters.
inline void write_corridor_csv(std::ostream& os,
                               const std::vector<Region>& regions) {
  os << "k,T_start,h,lbias,lskew,ubias,uskew\n";
  for (size_t k = 0; k < regions.size(); ++k) {
    const Region& r = regions[k];
    os << k << ',' << detail::fmt9(r.t_start) << ',' << detail::fmt9(r.duration)
       << ',' << detail::fmt9(r.lbias) << ',' << detail::fmt9(r.lskew) << ','
       << detail::fmt9(r.ubias) << ',' << detail::fmt9(r.uskew) << '\n';
  }
}

/// Metrics summary as key,value rows: objective, comfort numbers, solver
/// stats and per-stage timings in microseconds.
inline void write_metrics_csv(std::ostream& os, const PlanResult& result,
                              const ComfortMetrics& metrics) {
  os << "key,value\n";
  os << "objective_J," << detail::fmt9(result.objective_J) << '\n';
  os << "max_abs_accel," << detail::fmt9(metrics.max_abs_accel) << '\n';
  os << "avg_accel," << detail::fmt9(metrics.avg_accel) << '\n';
  os << "max_abs_jerk," << detail::fmt9(metrics.max_abs_jerk) << '\n';
  os << "solver_iterations," << result.solve_stats.iterations << '\n';
  os << "solver_status," << to_string(result.solve_stats.status) << '\n';
  os << "segments," << result.spline.segments.size() << '\n';
  os << "dp_us," << result.timings.dp_us << '\n';
  os << "bounds_us," << result.timings.bounds_us << '\n';
  os << "regions_us," << result.timings.regions_us << '\n';
  os << "build_us," << result.timings.build_us << '\n';
  os << "solve_us," << result.timings.solve_us << '\n';
  os << "verify_us," << result.timings.verify_us << '\n';
  os << "total_us," << result.timings.total_us << '\n';
}

}  // namespace stplan

#endif  // STPLAN_EXPORT_HPP_
