#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hierctl/simulation.hpp"

namespace hierctl {

// Fixed start/goal/obstacle setup for a single traced run of the task stack.
struct TraceScenario {
  std::string name;
  Vector start_q;
  Eigen::Vector2d goal{0.0, 0.0};
  std::vector<Circle> obstacles;
};

struct PerfOptions {
  std::size_t cycles = 10000;
  std::size_t repeats = 5;
  Vector start_q;
  Eigen::Vector2d goal{0.0, 0.0};
  std::vector<Circle> obstacles;
};

struct RunConfig {
  std::string chain_name = "planar4";
  ChainParams chain;
  TaskParams tasks;
  Vector comfort_config;
  BenchmarkOptions benchmark;
  std::vector<std::string> presets;  // benchmark presets, in table order

  std::string trace_scenario = "obstacle";
  std::string trace_preset = "ours-MI";
  double trace_max_duration = 30.0;
  double trace_goal_tolerance = 1e-3;
  std::vector<TraceScenario> trace_scenarios;

  Vector experiment_start_q;
  Eigen::Vector2d experiment_goal{0.0, 0.0};
  double experiment_duration = 5.0;
  ExperimentOptions experiment;

  PerfOptions perf;
  std::string output_dir = "out";

  // Throws InputError on inconsistent settings.
  void validate() const;
};

// "planar4" (benchmark chain) or "planar7" (timing chain).
ChainParams chain_preset(const std::string& name);

// All defaults for the named chain preset.
RunConfig default_run_config(const std::string& chain = "planar4");

// JSON file overlaid on the defaults; unknown keys are rejected.
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& json_text);

// "free", "obstacle", any configured name, or a non-negative integer
// selecting a sampled benchmark scenario (free space).
TraceScenario resolve_trace_scenario(const RunConfig& config, const std::string& id);

// Names of every preset accepted by the benchmark (hierarchical and closed-form).
std::vector<std::string> all_preset_names();

}  // namespace hierctl
