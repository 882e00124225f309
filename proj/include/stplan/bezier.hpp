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

#ifndef STPLAN_BEZIER_HPP_
#define STPLAN_BEZIER_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace stplan {

/// Binomial coefficients C(n, 0..n) from the Pascal triangle. Exact in
/// double through n = 56, far beyond the degrees used here.
inline std::vector<double> binomial_row(int n) {
  std::vector<double> row(static_cast<size_t>(n) + 1, 1.0);
  for (int i = 1; i <= n; ++i) {
    for (int j = i - 1; j >= 1; --j) {
      row[j] += row[j - 1];
    }
  }
  return row;
}

/// Bernstein basis b_n^i(u) = C(n,i) u^i (1-u)^(n-i) on u in [0,1].
inline double bernstein_basis(int n, int i, double u) {
  if (n < 0 || i < 0 || i > n) {
    throw std::domain_error("bernstein_basis: index out of range");
  }
  if (u < 0.0 || u > 1.0) {
    throw std::domain_error("bernstein_basis: u outside [0,1]");
  }
  return binomial_row(n)[static_cast<size_t>(i)] * std::pow(u, i) *
         std::pow(1.0 - u, n - i);
}

/// De Casteljau evaluation of a Bezier polynomial with the given control
/// points at u in [0,1]. Numerically stable for all degrees used here.
inline double de_casteljau(const std::vector<double>& control, double u) {
  if (control.empty()) {
    throw std::domain_error("de_casteljau: empty control vector");
  }
  std::vector<double> work(control);
  for (size_t r = work.size() - 1; r >= 1; --r) {
    for (size_t i = 0; i < r; ++i) {
      work[i] = (1.0 - u) * work[i] + u * work[i + 1];
    }
  }
  return work[0];
}

/// Control points of the order-th derivative Bezier polynomial,
/// c_i^{l+1} = (n-l) (c_{i+1}^l - c_i^l) applied `order` times.
inline std::vector<double> hodograph(const std::vector<double>& control,
                                     int degree, int order) {
  if (order < 0 || order > degree) {
    throw std::domain_error("hodograph: derivative order exceeds degree");
  }
  if (control.size() != static_cast<size_t>(degree) + 1) {
    throw std::domain_error("hodograph: control size must be degree+1");
  }
  std::vector<double> pts(control);
  for (int l = 0; l < order; ++l) {
    const double factor = static_cast<double>(degree - l);
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
      pts[i] = factor * (pts[i + 1] - pts[i]);
    }
    pts.pop_back();
  }
  return pts;
}

/// Min/max of the control points, which bound the curve on [0,1] by the
/// convex hull property.
inline std::pair<double, double> hull_bounds(const std::vector<double>& c) {
  if (c.empty()) {
    throw std::domain_error("hull_bounds: empty control vector");
  }
  auto [lo, hi] = std::minmax_element(c.begin(), c.end());
  return {*lo, *hi};
}

/// Transition matrix M with c = M p, mapping monomial coefficients of
/// sum_i p_i u^i to Bernstein control points of the same polynomial.
/// M_{n-j,i} = C(n-i,j) / C(n,j) for i+j <= n and 0 otherwise, so M is
/// lower triangular with unit first column and entries in [0,1].
inline Eigen::MatrixXd transition_matrix(int n) {
  if (n < 1) {
    throw std::domain_error("transition_matrix: degree must be >= 1");
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n + 1, n + 1);
  const std::vector<double> cn = binomial_row(n);
  for (int i = 0; i <= n; ++i) {
    const std::vector<double> cni = binomial_row(n - i);
    for (int j = 0; j <= n - i; ++j) {
      m(n - j, i) = cni[static_cast<size_t>(j)] / cn[static_cast<size_t>(j)];
    }
  }
  return m;
}

/// Exact inverse of transition_matrix: p = M^{-1} c with
/// (M^{-1})_{j,i} = (-1)^{j-i} C(n,j) C(j,i) for i <= j. Integer entries,
/// so the monomial<->Bezier round trip is exact up to rounding.
inline Eigen::MatrixXd inverse_transition_matrix(int n) {
  if (n < 1) {
    throw std::domain_error("inverse_transition_matrix: degree must be >= 1");
  }
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n + 1, n + 1);
  const std::vector<double> cn = binomial_row(n);
  for (int j = 0; j <= n; ++j) {
    const std::vector<double> cj = binomial_row(j);
    for (int i = 0; i <= j; ++i) {
      const double sign = ((j - i) % 2 == 0) ? 1.0 : -1.0;
      w(j, i) = sign * cn[static_cast<size_t>(j)] * cj[static_cast<size_t>(i)];
    }
  }
  return w;
}

/// Control points of the Bezier form of sum_i p_i u^i.
inline std::vector<double> monomial_to_bezier(const std::vector<double>& p) {
  const int n = static_cast<int>(p.size()) - 1;
  const Eigen::MatrixXd m = transition_matrix(n);
  Eigen::VectorXd pv = Eigen::Map<const Eigen::VectorXd>(p.data(), n + 1);
  Eigen::VectorXd cv = m * pv;
  return std::vector<double>(cv.data(), cv.data() + n + 1);
}

/// Monomial coefficients on u in [0,1] of a Bezier polynomial.
inline std::vector<double> bezier_to_monomial(const std::vector<double>& c) {
  const int n = static_cast<int>(c.size()) - 1;
  const Eigen::MatrixXd w = inverse_transition_matrix(n);
  Eigen::VectorXd cv = Eigen::Map<const Eigen::VectorXd>(c.data(), n + 1);
  Eigen::VectorXd pv = w * cv;
  return std::vector<double>(pv.data(), pv.data() + n + 1);
}

/// One piece of a piecewise speed profile. The station curve on
/// [t_start, t_start + duration] is
///   s(t) = duration * B((t - t_start) / duration)
/// with B the Bezier polynomial of the stored control points, and the
/// l-th time derivative is duration^(1-l) * B^(l)(u).
struct BezierSegment {
  int degree = 0;
  std::vector<double> control;  // degree + 1 points, pre-scaling
  double duration = 0.0;        // seconds, > 0
  double t_start = 0.0;         // seconds

  double end_time() const { return t_start + duration; }

  /// Value-level control points duration * c_i; these are the points the
  /// corridor conditions constrain, and s(t) = sum_i scaled_i b_n^i(u).
  std::vector<double> scaled_control() const {
    std::vector<double> s(control);
    for (double& v : s) v *= duration;
    return s;
  }

  double evaluate_local(double u, int order) const {
    const std::vector<double> pts = hodograph(control, degree, order);
    return std::pow(duration, 1 - order) * de_casteljau(pts, u);
  }
};

/// Piecewise Bezier speed profile over contiguous segments.
struct BezierSpline {
  std::vector<BezierSegment> segments;
  double total_T = 0.0;  // seconds, equals the sum of durations

  double start_time() const {
    return segments.empty() ? 0.0 : segments.front().t_start;
  }
  double end_time() const { return start_time() + total_T; }

  void validate() const {
    if (segments.empty()) {
      throw std::invalid_argument("BezierSpline: no segments");
    }
    double t = segments.front().t_start;
    double sum = 0.0;
    for (const BezierSegment& seg : segments) {
      if (seg.degree < 1 ||
          seg.control.size() != static_cast<size_t>(seg.degree) + 1) {
        throw std::invalid_argument("BezierSpline: malformed segment");
      }
      if (!(seg.duration > 0.0)) {
        throw std::invalid_argument("BezierSpline: nonpositive duration");
      }
      if (std::abs(seg.t_start - t) > 1e-9) {
        throw std::invalid_argument("BezierSpline: segments not contiguous");
      }
      t += seg.duration;
      sum += seg.duration;
    }
    if (std::abs(sum - total_T) > 1e-9) {
      throw std::invalid_argument("BezierSpline: total_T mismatch");
    }
  }

  /// Index of the segment covering t; junctions resolve to the right
  /// segment, the horizon end to the last one.
  size_t segment_index(double t) const {
    const double t0 = start_time();
    if (t < t0 - 1e-9 || t > t0 + total_T + 1e-9) {
      throw std::out_of_range("BezierSpline: t outside profile");
    }
    size_t lo = 0, hi = segments.size() - 1;
    while (lo < hi) {
      const size_t mid = (lo + hi) / 2;
      if (t < segments[mid].end_time()) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    return lo;
  }

  /// s(t) and its time derivatives: order 0 -> m, 1 -> m/s, 2 -> m/s^2,
  /// 3 -> m/s^3.
  double evaluate(double t, int order = 0) const {
    const BezierSegment& seg = segments[segment_index(t)];
    double u = (t - seg.t_start) / seg.duration;
    u = std::clamp(u, 0.0, 1.0);
    return seg.evaluate_local(u, order);
  }
};

}  // namespace stplan

#endif  // STPLAN_BEZIER_HPP_
