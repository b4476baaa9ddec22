#include "hierctl/runs.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "hierctl/errors.hpp"

namespace hierctl {
namespace {

ControllerPreset require_preset(const std::string& name) {
  const auto preset = find_preset(name);
  if (!preset) {
    throw InputError("unknown preset '" + name + "'");
  }
  return *preset;
}

std::size_t active_count(const StackEvaluation& eval) {
  return static_cast<std::size_t>(std::count_if(eval.tasks.begin(), eval.tasks.end(),
                                                [](const TaskOutput& t) { return t.importance > 0.0; }));
}

}  // namespace

RunMetrics run_trace(const RunConfig& config, const TraceScenario& scenario, PriorityMode mode) {
  config.validate();
  if (scenario.start_q.size() != static_cast<Eigen::Index>(config.chain.dof())) {
    throw InputError("trace scenario does not match the chain");
  }
  WorldModel world;
  world.start = forward_kinematics(config.chain, scenario.start_q);
  world.goal = scenario.goal;
  world.obstacles = scenario.obstacles;
  world.comfort_config = config.comfort_config;
  StackPolicy policy(config.chain, world, config.tasks, require_preset(config.trace_preset), mode,
                     config.trace_goal_tolerance);
  IntegrationOptions options = config.benchmark.integration;
  options.max_duration = config.trace_max_duration;
  options.record_trace = true;
  options.comfort_config = config.comfort_config;
  options.kappa = config.tasks.kappa;
  return integrate_velocity_control(config.chain, policy, scenario.start_q, options);
}

PerfReport run_perf(const RunConfig& config) {
  config.validate();
  WorldModel world;
  world.start = forward_kinematics(config.chain, config.perf.start_q);
  world.goal = config.perf.goal;
  world.obstacles = config.perf.obstacles;
  world.comfort_config = config.comfort_config;
  const StackPolicy policy(config.chain, world, config.tasks, require_preset("ours-MI"),
                           PriorityMode::kMetric);
  const double dt = config.benchmark.integration.dt;

  PerfReport report;
  report.dof = config.chain.dof();
  report.cycles = config.perf.cycles;
  report.repeats = config.perf.repeats;
  {
    StackEvaluation eval;
    policy.cycle(config.perf.start_q, &eval);
    report.active_tasks = active_count(eval);
    for (const TaskOutput& t : eval.tasks) {
      report.initial_importances.push_back(t.importance);
    }
  }

  double active = 0.0;
  std::vector<double> all;
  all.reserve(report.cycles * report.repeats);
  for (std::size_t r = 0; r < report.repeats; ++r) {
    Vector q = config.perf.start_q;
    double sum = 0.0;
    for (std::size_t c = 0; c < report.cycles; ++c) {
      const auto t0 = std::chrono::steady_clock::now();
      StackEvaluation eval;
      const ControlCommand cmd = policy.cycle(q, &eval);
      const auto t1 = std::chrono::steady_clock::now();
      active += static_cast<double>(active_count(eval));
      const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
      all.push_back(ms);
      sum += ms;
      if (cmd.qd_desired.allFinite()) {
        q += cmd.qd_desired * dt;
      }
    }
    report.repeat_means_ms.push_back(sum / static_cast<double>(report.cycles));
  }
  report.mean_active_tasks = active / static_cast<double>(all.size());
  report.mean_ms = std::accumulate(all.begin(), all.end(), 0.0) / static_cast<double>(all.size());
  std::sort(all.begin(), all.end());
  report.median_ms = all[all.size() / 2];
  report.p99_ms = all[std::min(all.size() - 1, static_cast<std::size_t>(0.99 * static_cast<double>(all.size())))];
  report.max_ms = all.back();
  const double m = std::accumulate(report.repeat_means_ms.begin(), report.repeat_means_ms.end(), 0.0) /
                   static_cast<double>(report.repeats);
  double var = 0.0;
  for (double v : report.repeat_means_ms) {
    var += (v - m) * (v - m);
  }
  report.repeat_stddev_ms = report.repeats > 1 ? std::sqrt(var / static_cast<double>(report.repeats - 1)) : 0.0;
  return report;
}

}  // namespace hierctl
