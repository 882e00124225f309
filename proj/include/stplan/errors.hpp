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

#ifndef STPLAN_ERRORS_HPP_
#define STPLAN_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <vector>

namespace stplan {

/// No monotone, velocity/acceleration-feasible path reaches the horizon.
class NoFeasiblePathError : public std::runtime_error {
 public:
  explicit NoFeasiblePathError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Station bounds collapsed (lb >= ub) at some fine time stamp.
class EmptyIntervalError : public std::runtime_error {
 public:
  EmptyIntervalError(const std::string& what, int stamp, double time)
      : std::runtime_error(what), stamp_index(stamp), time_s(time) {}
  int stamp_index;
  double time_s;
};

/// Bounds profile too short to carry any region.
class DegenerateBoundsError : public std::runtime_error {
 public:
  explicit DegenerateBoundsError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Rectangular-corridor bound pair is empty for one or more regions.
/// Carries the offending region indices and, per region, the largest
/// duration that would still have been feasible.
class RectInfeasibleError : public std::runtime_error {
 public:
  RectInfeasibleError(const std::string& what, std::vector<int> regions,
                      std::vector<double> duration_bounds)
      : std::runtime_error(what),
        region_indices(std::move(regions)),
        max_feasible_durations(std::move(duration_bounds)) {}
  std::vector<int> region_indices;
  std::vector<double> max_feasible_durations;
};

class DimensionMismatchError : public std::logic_error {
 public:
  explicit DimensionMismatchError(const std::string& what)
      : std::logic_error(what) {}
};

/// Boundary linearization cannot produce a usable conservative envelope.
class LinearizationError : public std::runtime_error {
 public:
  explicit LinearizationError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Scenario text is syntactically or semantically invalid. The message
/// always names the offending field path.
class ScenarioParseError : public std::runtime_error {
 public:
  explicit ScenarioParseError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace stplan

#endif  // STPLAN_ERRORS_HPP_
