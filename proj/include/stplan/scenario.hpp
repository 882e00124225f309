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

#ifndef STPLAN_SCENARIO_HPP_
#define STPLAN_SCENARIO_HPP_

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stplan/errors.hpp"
#include "stplan/planner.hpp"

namespace stplan {

// Scenario files are versioned JSON with explicit field names. Parsing is
// strict: unknown fields are rejected and every diagnostic names the
// offending field path. Missing optional fields take the documented
// defaults; obstacles must always be fully specified.

inline constexpr int kScenarioVersion = 1;

namespace detail {

using Json = nlohmann::json;

inline void require_known_keys(const Json& obj, const std::string& path,
                               const std::vector<std::string>& known) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const std::string& k : known) {
      if (item.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ScenarioParseError(path + "." + item.key() + ": unknown field");
    }
  }
}

inline double read_number(const Json& obj, const std::string& path,
                          const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_number()) {
    throw ScenarioParseError(path + "." + key + ": expected a number");
  }
  const double d = v.get<double>();
  if (!std::isfinite(d)) {
    throw ScenarioParseError(path + "." + key + ": must be finite");
  }
  return d;
}

inline double read_required_number(const Json& obj, const std::string& path,
                                   const std::string& key) {
  if (!obj.contains(key)) {
    throw ScenarioParseError(path + "." + key + ": missing required field");
  }
  return read_number(obj, path, key, 0.0);
}

}  // namespace detail

/// Parses scenario text. Throws ScenarioParseError with a field-addressed
/// message on any syntax, schema or invariant problem.
inline Scenario parse_scenario(const std::string& text) {
  detail::Json root;
  try {
    root = detail::Json::parse(text);
  } catch (const detail::Json::parse_error& e) {
    throw ScenarioParseError(std::string("scenario: JSON syntax error: ") +
                             e.what());
  }
  if (!root.is_object()) {
    throw ScenarioParseError("scenario: top level must be an object");
  }
  detail::require_known_keys(root, "scenario",
                             {"version", "horizon_T", "initial",
                              "cruise_speed", "limits", "obstacles", "grid"});
  if (!root.contains("version") || !root.at("version").is_number_integer() ||
      root.at("version").get<int>() != kScenarioVersion) {
    throw ScenarioParseError("scenario.version: must be the integer 1");
  }

  Scenario sc;
  sc.horizon_T = detail::read_number(root, "scenario", "horizon_T", 7.0);
  sc.cruise_speed = detail::read_number(root, "scenario", "cruise_speed", 10.0);

  if (root.contains("initial")) {
    const detail::Json& init = root.at("initial");
    if (!init.is_object()) {
      throw ScenarioParseError("scenario.initial: expected an object");
    }
    detail::require_known_keys(init, "scenario.initial", {"s0", "v0", "a0"});
    sc.initial.s0 = detail::read_number(init, "scenario.initial", "s0", 0.0);
    sc.initial.v0 = detail::read_number(init, "scenario.initial", "v0", 10.0);
    sc.initial.a0 = detail::read_number(init, "scenario.initial", "a0", 0.0);
  } else {
    sc.initial = InitialState{0.0, 10.0, 0.0};
  }

  if (root.contains("limits")) {
    const detail::Json& lim = root.at("limits");
    if (!lim.is_object()) {
      throw ScenarioParseError("scenario.limits: expected an object");
    }
    detail::require_known_keys(
        lim, "scenario.limits",
        {"v_max", "a_min", "a_max", "j_min", "j_max", "a_cm", "kappa"});
    sc.limits.v_max = detail::read_number(lim, "scenario.limits", "v_max", 20.0);
    sc.limits.a_min = detail::read_number(lim, "scenario.limits", "a_min", -4.0);
    sc.limits.a_max = detail::read_number(lim, "scenario.limits", "a_max", 3.0);
    sc.limits.j_min = detail::read_number(lim, "scenario.limits", "j_min", -10.0);
    sc.limits.j_max = detail::read_number(lim, "scenario.limits", "j_max", 10.0);
    sc.limits.a_cm = detail::read_number(lim, "scenario.limits", "a_cm", 1.5);
    if (lim.contains("kappa")) {
      const detail::Json& kap = lim.at("kappa");
      if (kap.is_number()) {
        sc.limits.kappa = {kap.get<double>()};
      } else if (kap.is_array()) {
        for (size_t i = 0; i < kap.size(); ++i) {
          if (!kap[i].is_number()) {
            throw ScenarioParseError("scenario.limits.kappa[" +
                                     std::to_string(i) +
                                     "]: expected a number");
          }
          sc.limits.kappa.push_back(kap[i].get<double>());
        }
      } else {
        throw ScenarioParseError(
            "scenario.limits.kappa: expected a number or an array");
      }
      for (size_t i = 0; i < sc.limits.kappa.size(); ++i) {
        if (!std::isfinite(sc.limits.kappa[i]) || sc.limits.kappa[i] < 0.0) {
          throw ScenarioParseError("scenario.limits.kappa[" +
                                   std::to_string(i) +
                                   "]: must be finite and >= 0");
        }
      }
    }
  }

  if (root.contains("obstacles")) {
    const detail::Json& obs = root.at("obstacles");
    if (!obs.is_array()) {
      throw ScenarioParseError("scenario.obstacles: expected an array");
    }
    for (size_t i = 0; i < obs.size(); ++i) {
      const std::string path = "scenario.obstacles[" + std::to_string(i) + "]";
      const detail::Json& o = obs[i];
      if (!o.is_object()) {
        throw ScenarioParseError(path + ": expected an object");
      }
      detail::require_known_keys(
          o, path, {"t_enter", "t_exit", "s_at_enter", "speed", "block_length"});
      ObstacleTrace trace;
      trace.t_enter = detail::read_required_number(o, path, "t_enter");
      trace.t_exit = detail::read_required_number(o, path, "t_exit");
      trace.s_at_enter = detail::read_required_number(o, path, "s_at_enter");
      trace.speed = detail::read_required_number(o, path, "speed");
      trace.block_length = detail::read_required_number(o, path, "block_length");
      if (!(trace.t_enter >= 0.0)) {
        throw ScenarioParseError(path + ".t_enter: must be >= 0");
      }
      if (!(trace.t_exit > trace.t_enter)) {
        throw ScenarioParseError(path + ".t_exit: must exceed t_enter");
      }
      if (!(trace.t_exit <= sc.horizon_T)) {
        throw ScenarioParseError(path + ".t_exit: must be <= horizon_T");
      }
      if (!(trace.block_length > 0.0)) {
        throw ScenarioParseError(path + ".block_length: must be > 0");
      }
      sc.obstacles.push_back(trace);
    }
  }

  if (root.contains("grid")) {
    const detail::Json& grid = root.at("grid");
    if (!grid.is_object()) {
      throw ScenarioParseError("scenario.grid: expected an object");
    }
    detail::require_known_keys(grid, "scenario.grid", {"dt1", "ds", "N"});
    sc.dt1 = detail::read_number(grid, "scenario.grid", "dt1", 1.0);
    sc.ds = detail::read_number(grid, "scenario.grid", "ds", 0.5);
    if (grid.contains("N")) {
      if (!grid.at("N").is_number_integer() || grid.at("N").get<int>() < 1) {
        throw ScenarioParseError("scenario.grid.N: must be an integer >= 1");
      }
      sc.fine_per_coarse = grid.at("N").get<int>();
    }
  }

  try {
    sc.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioParseError(std::string("scenario: ") + e.what());
  }
  return sc;
}

/// Reads and parses a scenario file.
inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ScenarioParseError("scenario: cannot open file " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

/// Canonical serialization; parse_scenario(serialize_scenario(s)) == s.
inline std::string serialize_scenario(const Scenario& sc) {
  detail::Json root;
  root["version"] = kScenarioVersion;
  root["horizon_T"] = sc.horizon_T;
  root["cruise_speed"] = sc.cruise_speed;
  root["initial"] = {{"s0", sc.initial.s0},
                     {"v0", sc.initial.v0},
                     {"a0", sc.initial.a0}};
  detail::Json limits = {{"v_max", sc.limits.v_max}, {"a_min", sc.limits.a_min},
                         {"a_max", sc.limits.a_max}, {"j_min", sc.limits.j_min},
                         {"j_max", sc.limits.j_max}, {"a_cm", sc.limits.a_cm}};
  if (sc.limits.kappa.size() == 1) {
    limits["kappa"] = sc.limits.kappa.front();
  } else if (!sc.limits.kappa.empty()) {
    limits["kappa"] = sc.limits.kappa;
  }
  root["limits"] = limits;
  detail::Json obstacles = detail::Json::array();
  for (const ObstacleTrace& ob : sc.obstacles) {
    obstacles.push_back({{"t_enter", ob.t_enter},
                         {"t_exit", ob.t_exit},
                         {"s_at_enter", ob.s_at_enter},
                         {"speed", ob.speed},
                         {"block_length", ob.block_length}});
  }
  root["obstacles"] = obstacles;
  root["grid"] = {{"dt1", sc.dt1}, {"ds", sc.ds}, {"N", sc.fine_per_coarse}};
  return root.dump(2) + "\n";
}

inline bool operator==(const InitialState& a, const InitialState& b) {
  return a.s0 == b.s0 && a.v0 == b.v0 && a.a0 == b.a0;
}

inline bool operator==(const ObstacleTrace& a, const ObstacleTrace& b) {
  return a.t_enter == b.t_enter && a.t_exit == b.t_exit &&
         a.s_at_enter == b.s_at_enter && a.speed == b.speed &&
         a.block_length == b.block_length;
}

inline bool operator==(const Scenario& a, const Scenario& b) {
  return a.horizon_T == b.horizon_T && a.initial == b.initial &&
         a.cruise_speed == b.cruise_speed &&
         a.limits.v_max == b.limits.v_max && a.limits.a_min == b.limits.a_min &&
         a.limits.a_max == b.limits.a_max && a.limits.j_min == b.limits.j_min &&
         a.limits.j_max == b.limits.j_max && a.limits.a_cm == b.limits.a_cm &&
         a.limits.kappa == b.limits.kappa && a.obstacles == b.obstacles &&
         a.dt1 == b.dt1 && a.ds == b.ds &&
         a.fine_per_coarse == b.fine_per_coarse;
}

/// Seeded random scenario for benchmarking: one to three constant-speed
/// obstacles with speeds in [-5, 15] m/s and entry times in [0, 5] s,
/// drawn so they never block the start state. Identical seeds produce
/// identical scenarios.
inline Scenario random_scenario(uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  Scenario sc;  // defaults: T = 7, v0 = cruise = 10, standard limits
  const int count = 1 + static_cast<int>(u01(rng) * 3.0) % 3;
  for (int i = 0; i < count; ++i) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      ObstacleTrace ob;
      ob.t_enter = 5.0 * u01(rng);
      const double window = 1.5 + 2.5 * u01(rng);
      ob.t_exit = std::min(sc.horizon_T, ob.t_enter + window);
      ob.speed = -5.0 + 20.0 * u01(rng);
      ob.block_length = 4.0 + 4.0 * u01(rng);
      ob.s_at_enter = 8.0 + 62.0 * u01(rng);
      if (!(ob.t_exit > ob.t_enter + 0.5)) continue;
      // Keep the start node clear of the parallelogram.
      if (ob.covers(0.0) && sc.initial.s0 >= ob.s_low(0.0) - 1.0 &&
          sc.initial.s0 <= ob.s_high(0.0) + 1.0) {
        continue;
      }
      sc.obstacles.push_back(ob);
      break;
    }
  }
  return sc;
}

}  // namespace stplan

#endif  // STPLAN_SCENARIO_HPP_
