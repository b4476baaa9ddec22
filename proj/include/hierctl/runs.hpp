#pragma once

#include <vector>

#include "hierctl/config.hpp"

namespace hierctl {

// Four-task stack run on a trace scenario with the full trace recorded.
RunMetrics run_trace(const RunConfig& config, const TraceScenario& scenario, PriorityMode mode);

struct PerfReport {
  std::size_t dof = 0;
  std::size_t cycles = 0;   // per repeat
  std::size_t repeats = 0;
  std::size_t active_tasks = 0;  // tasks with eta > 0 at the first cycle
  std::vector<double> initial_importances;
  double mean_active_tasks = 0.0;  // over all timed cycles
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double p99_ms = 0.0;
  double max_ms = 0.0;
  std::vector<double> repeat_means_ms;
  double repeat_stddev_ms = 0.0;
};

// Times full control cycles (task evaluation, priorities, hierarchy) of the
// four-task stack while the chain moves under its own commands.
PerfReport run_perf(const RunConfig& config);

}  // namespace hierctl
