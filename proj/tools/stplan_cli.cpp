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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stplan/export.hpp"
#include "stplan/planner.hpp"
#include "stplan/scenario.hpp"

namespace {

// Stable exit codes, also documented in the README.
constexpr int kExitOk = 0;
constexpr int kExitParseFailure = 2;
constexpr int kExitSearchFailure = 3;  // DP / bounds / region stages
constexpr int kExitQpInfeasible = 4;   // corridor or QP infeasibility
constexpr int kExitInternalError = 5;

namespace fs = std::filesystem;

int exit_code_for(const stplan::PlanFailure& failure) {
  switch (failure.stage) {
    case stplan::PlanStage::kDpSearch:
    case stplan::PlanStage::kBounds:
    case stplan::PlanStage::kRegions:
      return kExitSearchFailure;
    case stplan::PlanStage::kQpBuild:
    case stplan::PlanStage::kQpSolve:
      return kExitQpInfeasible;
    default:
      return kExitInternalError;
  }
}

void print_failure(const stplan::PlanFailure& failure) {
  std::cerr << "plan failed at stage " << stplan::to_string(failure.stage)
            << ": " << failure.message << "\n";
  for (size_t i = 0; i < failure.region_indices.size(); ++i) {
    std::cerr << "  region " << failure.region_indices[i]
              << " exceeds the rectangular feasibility bound (max h = "
              << failure.feasible_durations[i] << " s)\n";
  }
}

std::string cell(double v) {
  if (!std::isfinite(v)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

int run_plan(const std::string& scenario_path, const std::string& mode,
             const std::string& out_dir, double sample_dt) {
  stplan::Scenario scenario;
  try {
    scenario = stplan::load_scenario(scenario_path);
  } catch (const stplan::ScenarioParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitParseFailure;
  }
  stplan::PlannerConfig config;
  config.mode = (mode == "rc") ? stplan::CorridorMode::kRectangular
                               : stplan::CorridorMode::kTrapezoidal;
  const stplan::PlanOutcome outcome = stplan::plan(scenario, config);
  if (!outcome.ok) {
    print_failure(outcome.failure);
    return exit_code_for(outcome.failure);
  }

  fs::create_directories(out_dir);
  {
    std::ofstream os(fs::path(out_dir) / "profile.csv");
    stplan::write_profile_csv(os, outcome.result.spline, sample_dt);
  }
  {
    std::ofstream os(fs::path(out_dir) / "corridor.csv");
    stplan::write_corridor_csv(os, outcome.result.regions);
  }
  const stplan::ComfortMetrics metrics =
      stplan::comfort_metrics(outcome.result.spline);
  {
    std::ofstream os(fs::path(out_dir) / "metrics.csv");
    stplan::write_metrics_csv(os, outcome.result, metrics);
  }
  std::cout << "mode " << stplan::to_string(config.mode) << ": J = "
            << outcome.result.objective_J
            << ", max |a| = " << metrics.max_abs_accel
            << " m/s^2, avg a = " << metrics.avg_accel
            << " m/s^2, total = " << outcome.result.timings.total_us / 1000.0
            << " ms\n";
  std::cout << "wrote profile.csv, corridor.csv, metrics.csv to " << out_dir
            << "\n";
  return kExitOk;
}

int run_compare(const std::string& scenario_path, const std::string& out_dir) {
  stplan::Scenario scenario;
  try {
    scenario = stplan::load_scenario(scenario_path);
  } catch (const stplan::ScenarioParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitParseFailure;
  }
  const stplan::ComparisonReport report =
      stplan::compare_modes(scenario, stplan::PlannerConfig{});

  const auto row = [](const char* name, const stplan::ModeReport& r) {
    std::printf("%-4s %-18s %-12s %-10s %-10s %-10s\n", name,
                r.status.c_str(), r.ok ? cell(r.objective_J).c_str() : "-",
                r.ok ? cell(r.metrics.max_abs_accel).c_str() : "-",
                r.ok ? cell(r.metrics.avg_accel).c_str() : "-",
                r.ok ? cell(r.solve_ms).c_str() : "-");
  };
  std::printf("%-4s %-18s %-12s %-10s %-10s %-10s\n", "mode", "status", "J",
              "max_acc", "avg_acc", "solve_ms");
  row("RC", report.rectangular);
  row("TC", report.trapezoidal);

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream os(fs::path(out_dir) / "compare.csv");
    os << "mode,status,J,max_acc,avg_acc,solve_ms\n";
    const auto csv_row = [&os](const char* name, const stplan::ModeReport& r) {
      os << name << ',' << r.status << ',';
      if (r.ok) {
        os << stplan::detail::fmt9(r.objective_J) << ','
           << stplan::detail::fmt9(r.metrics.max_abs_accel) << ','
           << stplan::detail::fmt9(r.metrics.avg_accel) << ','
           << stplan::detail::fmt9(r.solve_ms) << '\n';
      } else {
        os << "-,-,-,-\n";
      }
    };
    csv_row("RC", report.rectangular);
    csv_row("TC", report.trapezoidal);
  }
  return kExitOk;
}

struct Stats {
  std::vector<double> samples;
  void add(double v) { samples.push_back(v); }
  double ave() const {
    if (samples.empty()) return 0.0;
    double s = 0.0;
    for (double v : samples) s += v;
    return s / static_cast<double>(samples.size());
  }
  double std_dev() const {
    if (samples.size() < 2) return 0.0;
    const double m = ave();
    double s = 0.0;
    for (double v : samples) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(samples.size()));
  }
  double worst() const {
    double w = 0.0;
    for (double v : samples) w = std::max(w, v);
    return w;
  }
};

int run_bench(const std::string& dir, uint64_t seed, int count, int reps,
              const std::string& csv_path) {
  std::vector<stplan::Scenario> scenarios;
  std::vector<std::string> names;
  if (!dir.empty()) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const fs::path& p : files) {
      try {
        scenarios.push_back(stplan::load_scenario(p.string()));
        names.push_back(p.filename().string());
      } catch (const stplan::ScenarioParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitParseFailure;
      }
    }
  } else {
    for (int i = 0; i < count; ++i) {
      scenarios.push_back(stplan::random_scenario(seed + static_cast<uint64_t>(i)));
      names.push_back("seed_" + std::to_string(seed + static_cast<uint64_t>(i)));
    }
  }
  if (scenarios.empty()) {
    std::cerr << "bench: no scenarios\n";
    return kExitParseFailure;
  }

  struct ModeAgg {
    Stats end_to_end;
    Stats dp, bounds, regions, build, solve, verify;
    int successes = 0;
    int failures = 0;
  };
  ModeAgg tc, rc;

  stplan::PlannerConfig config;
  for (const stplan::Scenario& scenario : scenarios) {
    for (int r = 0; r < reps; ++r) {
      for (const auto mode : {stplan::CorridorMode::kTrapezoidal,
                              stplan::CorridorMode::kRectangular}) {
        config.mode = mode;
        ModeAgg& agg = (mode == stplan::CorridorMode::kTrapezoidal) ? tc : rc;
        const stplan::PlanOutcome outcome = stplan::plan(scenario, config);
        if (!outcome.ok) {
          ++agg.failures;
          continue;
        }
        ++agg.successes;
        const stplan::StageTimings& t = outcome.result.timings;
        agg.end_to_end.add(static_cast<double>(t.total_us) / 1000.0);
        agg.dp.add(static_cast<double>(t.dp_us) / 1000.0);
        agg.bounds.add(static_cast<double>(t.bounds_us) / 1000.0);
        agg.regions.add(static_cast<double>(t.regions_us) / 1000.0);
        agg.build.add(static_cast<double>(t.build_us) / 1000.0);
        agg.solve.add(static_cast<double>(t.solve_us) / 1000.0);
        agg.verify.add(static_cast<double>(t.verify_us) / 1000.0);
      }
    }
  }

  std::printf("%zu scenario(s), %d repetition(s)\n", scenarios.size(), reps);
  std::printf("%-6s %-10s %-10s %-10s %-8s %-8s\n", "mode", "Ave/ms", "Std/ms",
              "Worst/ms", "plans", "failed");
  const auto summary = [](const char* name, const ModeAgg& agg) {
    std::printf("%-6s %-10.3f %-10.3f %-10.3f %-8d %-8d\n", name,
                agg.end_to_end.ave(), agg.end_to_end.std_dev(),
                agg.end_to_end.worst(), agg.successes + agg.failures,
                agg.failures);
  };
  summary("TC", tc);
  summary("RC", rc);

  std::printf("\nTC per-stage breakdown (ms):\n");
  std::printf("%-10s %-10s %-10s %-10s\n", "stage", "Ave", "Std", "Worst");
  const auto stage_row = [](const char* name, const Stats& s) {
    std::printf("%-10s %-10.3f %-10.3f %-10.3f\n", name, s.ave(), s.std_dev(),
                s.worst());
  };
  stage_row("dp", tc.dp);
  stage_row("bounds", tc.bounds);
  stage_row("regions", tc.regions);
  stage_row("build", tc.build);
  stage_row("solve", tc.solve);
  stage_row("verify", tc.verify);
  stage_row("total", tc.end_to_end);

  if (!csv_path.empty()) {
    std::ofstream os(csv_path);
    os << "mode,ave_ms,std_ms,worst_ms,plans,failed\n";
    const auto csv = [&os](const char* name, const ModeAgg& agg) {
      os << name << ',' << stplan::detail::fmt9(agg.end_to_end.ave()) << ','
         << stplan::detail::fmt9(agg.end_to_end.std_dev()) << ','
         << stplan::detail::fmt9(agg.end_to_end.worst()) << ','
         << (agg.successes + agg.failures) << ',' << agg.failures << '\n';
    };
    csv("TC", tc);
    csv("RC", rc);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speed profile planning on the S-T graph with piecewise "
               "Bezier corridors"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir, mode = "tc";
  double sample_dt = 0.01;
  auto* plan_cmd = app.add_subcommand("plan", "Plan one scenario");
  plan_cmd->add_option("--scenario", scenario_path, "Scenario JSON file")
      ->required();
  plan_cmd->add_option("--mode", mode, "Corridor mode: tc or rc")
      ->check(CLI::IsMember({"tc", "rc"}));
  plan_cmd->add_option("--out", out_dir, "Output directory")->required();
  plan_cmd->add_option("--sample-dt", sample_dt, "Profile sampling step [s]")
      ->check(CLI::PositiveNumber);

  std::string cmp_scenario, cmp_out;
  auto* compare_cmd =
      app.add_subcommand("compare", "Run both corridor modes side by side");
  compare_cmd->add_option("--scenario", cmp_scenario, "Scenario JSON file")
      ->required();
  compare_cmd->add_option("--out", cmp_out, "Output directory (compare.csv)");

  std::string bench_dir, bench_csv;
  uint64_t bench_seed = 1;
  int bench_count = 100, bench_reps = 1;
  auto* bench_cmd = app.add_subcommand("bench", "Timing benchmark");
  auto* dir_opt =
      bench_cmd->add_option("--dir", bench_dir, "Directory of scenario files");
  auto* seed_opt =
      bench_cmd->add_option("--seed", bench_seed, "Random scenario seed");
  bench_cmd->add_option("--count", bench_count, "Number of random scenarios")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--reps", bench_reps, "Repetitions per scenario")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--csv", bench_csv, "Write the summary to a CSV file");
  dir_opt->excludes(seed_opt);

  CLI11_PARSE(app, argc, argv);

  try {
    if (plan_cmd->parsed()) {
      return run_plan(scenario_path, mode, out_dir, sample_dt);
    }
    if (compare_cmd->parsed()) {
      return run_compare(cmp_scenario, cmp_out);
    }
    if (bench_cmd->parsed()) {
      return run_bench(bench_dir, bench_seed, bench_count, bench_reps,
                       bench_csv);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternalError;
  }
  return kExitOk;
}
