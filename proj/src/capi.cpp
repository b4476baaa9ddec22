#include "hierctl/hierctl.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <memory>
#include <sstream>
#include <string>

#include "hierctl/config.hpp"
#include "hierctl/errors.hpp"
#include "hierctl/report.hpp"
#include "hierctl/runs.hpp"

struct hierctl_config {
  hierctl::RunConfig config;
};

struct hierctl_bench_result {
  hierctl::BenchmarkTable table;
  std::string text;
};

struct hierctl_controller {
  hierctl::RunConfig config;
  std::unique_ptr<hierctl::StackPolicy> policy;
};

namespace {

thread_local std::string last_error;

hierctl_status fail(hierctl_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Maps exceptions thrown by the core to status codes.
template <typename Fn>
hierctl_status guarded(Fn&& fn) {
  try {
    last_error.clear();
    return fn();
  } catch (const hierctl::InputError& e) {
    return fail(HIERCTL_ERR_INPUT, e.what());
  } catch (const hierctl::SingularityError& e) {
    return fail(HIERCTL_ERR_SINGULAR, e.what());
  } catch (const hierctl::IoError& e) {
    return fail(HIERCTL_ERR_IO, e.what());
  } catch (const hierctl::NumericalError& e) {
    return fail(HIERCTL_ERR_NUMERIC, e.what());
  } catch (const std::exception& e) {
    return fail(HIERCTL_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(HIERCTL_ERR_INTERNAL, "unknown error");
  }
}

#define REQUIRE_ARG(cond, what)                                  \
  do {                                                           \
    if (!(cond)) return fail(HIERCTL_ERR_INPUT, what);           \
  } while (0)

std::vector<std::string> split_presets(const std::string& list) {
  if (list == "all") {
    std::vector<std::string> out;
    for (const auto& p : hierctl::hierarchy_presets()) {
      out.push_back(p.name);
    }
    return out;
  }
  if (list == "extended") {
    return hierctl::all_preset_names();
  }
  std::vector<std::string> out;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) {
      continue;
    }
    if (!hierctl::find_preset(item)) {
      throw hierctl::InputError("unknown preset '" + item + "'");
    }
    if (std::find(out.begin(), out.end(), item) == out.end()) {
      out.push_back(item);
    }
  }
  if (out.empty()) {
    throw hierctl::InputError("no presets selected");
  }
  return out;
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) {
    m = std::max(m, x);
  }
  return m;
}

}  // namespace

extern "C" {

const char* hierctl_last_error(void) { return last_error.c_str(); }

const char* hierctl_version(void) { return "0.1.0"; }

const char* hierctl_status_name(hierctl_status status) {
  switch (status) {
    case HIERCTL_OK:
      return "ok";
    case HIERCTL_ERR_INPUT:
      return "input error";
    case HIERCTL_ERR_SINGULAR:
      return "singular";
    case HIERCTL_ERR_IO:
      return "io error";
    case HIERCTL_ERR_NUMERIC:
      return "numerical error";
    case HIERCTL_ERR_CHECK:
      return "check failed";
    case HIERCTL_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown";
}

hierctl_status hierctl_config_create(const char* chain, hierctl_config** out) {
  REQUIRE_ARG(out != nullptr, "out must not be NULL");
  return guarded([&] {
    *out = new hierctl_config{hierctl::default_run_config(chain ? chain : "planar4")};
    return HIERCTL_OK;
  });
}

hierctl_status hierctl_config_load(const char* path, hierctl_config** out) {
  REQUIRE_ARG(out != nullptr && path != nullptr, "path and out must not be NULL");
  return guarded([&] {
    *out = new hierctl_config{hierctl::load_run_config(path)};
    return HIERCTL_OK;
  });
}

void hierctl_config_destroy(hierctl_config* config) { delete config; }

hierctl_status hierctl_config_set_chain(hierctl_config* config, const char* chain) {
  REQUIRE_ARG(config != nullptr && chain != nullptr, "config and chain must not be NULL");
  return guarded([&] {
    hierctl::RunConfig fresh = hierctl::default_run_config(chain);
    const hierctl::RunConfig& old = config->config;
    fresh.tasks = old.tasks;
    fresh.presets = old.presets;
    fresh.benchmark.scenarios = old.benchmark.scenarios;
    fresh.benchmark.seed = old.benchmark.seed;
    fresh.benchmark.threads = old.benchmark.threads;
    fresh.benchmark.integration.dt = old.benchmark.integration.dt;
    fresh.output_dir = old.output_dir;
    config->config = std::move(fresh);
    return HIERCTL_OK;
  });
}

hierctl_status hierctl_config_set_scenarios(hierctl_config* config, size_t scenarios) {
  REQUIRE_ARG(config != nullptr, "config must not be NULL");
  REQUIRE_ARG(scenarios > 0, "scenario count must be positive");
  config->config.benchmark.scenarios = scenarios;
  return HIERCTL_OK;
}

hierctl_status hierctl_config_set_seed(hierctl_config* config, uint64_t seed) {
  REQUIRE_ARG(config != nullptr, "config must not be NULL");
  config->config.benchmark.seed = seed;
  return HIERCTL_OK;
}

hierctl_status hierctl_config_set_dt(hierctl_config* config, double dt) {
  REQUIRE_ARG(config != nullptr, "config must not be NULL");
  REQUIRE_ARG(dt > 0.0 && std::isfinite(dt), "dt must be positive");
  config->config.benchmark.integration.dt = dt;
  return HIERCTL_OK;
}

hierctl_status hierctl_config_set_threads(hierctl_config* config, unsigned threads) {
  REQUIRE_ARG(config != nullptr, "config must not be NULL");
  config->config.benchmark.threads = std::max(1u, threads);
  return HIERCTL_OK;
}

hierctl_status hierctl_config_set_presets(hierctl_config* config, const char* presets) {
  REQUIRE_ARG(config != nullptr && presets != nullptr, "config and presets must not be NULL");
  return guarded([&] {
    config->config.presets = split_presets(presets);
    return HIERCTL_OK;
  });
}

hierctl_status hierctl_config_set_output_dir(hierctl_config* config, const char* dir) {
  REQUIRE_ARG(config != nullptr && dir != nullptr, "config and dir must not be NULL");
  config->config.output_dir = dir;
  return HIERCTL_OK;
}

hierctl_status hierctl_config_output_dir(const hierctl_config* config, const char** dir) {
  REQUIRE_ARG(config != nullptr && dir != nullptr, "config and dir must not be NULL");
  *dir = config->config.output_dir.c_str();
  return HIERCTL_OK;
}

hierctl_status hierctl_config_dof(const hierctl_config* config, size_t* dof) {
  REQUIRE_ARG(config != nullptr && dof != nullptr, "config and dof must not be NULL");
  *dof = config->config.chain.dof();
  return HIERCTL_OK;
}

hierctl_status hierctl_bench_run(const hierctl_config* config, hierctl_bench_result** out) {
  REQUIRE_ARG(config != nullptr && out != nullptr, "config and out must not be NULL");
  return guarded([&] {
    const hierctl::RunConfig& cfg = config->config;
    cfg.validate();
    std::vector<hierctl::ControllerPreset> presets;
    for (const std::string& name : cfg.presets) {
      presets.push_back(*hierctl::find_preset(name));
    }
    auto result = std::make_unique<hierctl_bench_result>();
    result->table = hierctl::run_benchmark(cfg.chain, presets, cfg.benchmark);
    result->text = hierctl::benchmark_text(result->table);
    *out = result.release();
    return HIERCTL_OK;
  });
}

void hierctl_bench_destroy(hierctl_bench_result* result) { delete result; }

hierctl_status hierctl_bench_row_count(const hierctl_bench_result* result, size_t* count) {
  REQUIRE_ARG(result != nullptr && count != nullptr, "result and count must not be NULL");
  *count = result->table.rows.size();
  return HIERCTL_OK;
}

hierctl_status hierctl_bench_get_row(const hierctl_bench_result* result, size_t index, hierctl_bench_row* row) {
  REQUIRE_ARG(result != nullptr && row != nullptr, "result and row must not be NULL");
  REQUIRE_ARG(index < result->table.rows.size(), "row index out of range");
  const hierctl::BenchmarkRow& r = result->table.rows[index];
  *row = {r.preset.c_str(), r.mean_ekin, r.mean_l, r.mean_sum, r.n_completed};
  return HIERCTL_OK;
}

hierctl_status hierctl_bench_excluded(const hierctl_bench_result* result, size_t* excluded) {
  REQUIRE_ARG(result != nullptr && excluded != nullptr, "result and excluded must not be NULL");
  *excluded = result->table.excluded;
  return HIERCTL_OK;
}

hierctl_status hierctl_bench_check(const hierctl_bench_result* result) {
  REQUIRE_ARG(result != nullptr, "result must not be NULL");
  return guarded([&] {
    const std::vector<std::string> failures = hierctl::check_benchmark_orderings(result->table);
    if (failures.empty()) {
      return HIERCTL_OK;
    }
    std::string msg;
    for (const std::string& f : failures) {
      msg += (msg.empty() ? "" : "; ") + f;
    }
    return fail(HIERCTL_ERR_CHECK, msg);
  });
}

hierctl_status hierctl_bench_table_text(const hierctl_bench_result* result, const char** text) {
  REQUIRE_ARG(result != nullptr && text != nullptr, "result and text must not be NULL");
  *text = result->text.c_str();
  return HIERCTL_OK;
}

hierctl_status hierctl_bench_write_json(const hierctl_bench_result* result, const char* path) {
  REQUIRE_ARG(result != nullptr && path != nullptr, "result and path must not be NULL");
  return guarded([&] {
    hierctl::write_text_file(path, hierctl::benchmark_json(result->table));
    return HIERCTL_OK;
  });
}

hierctl_status hierctl_trace_run(const hierctl_config* config, const char* scenario, int snap,
                                 const char* csv_path, hierctl_trace_summary* summary) {
  REQUIRE_ARG(config != nullptr && scenario != nullptr, "config and scenario must not be NULL");
  return guarded([&] {
    const hierctl::RunConfig& cfg = config->config;
    const hierctl::TraceScenario sc = hierctl::resolve_trace_scenario(cfg, scenario);
    const hierctl::RunMetrics m = hierctl::run_trace(
        cfg, sc, snap ? hierctl::PriorityMode::kSnap : hierctl::PriorityMode::kMetric);
    if (csv_path != nullptr) {
      hierctl::write_text_file(csv_path, hierctl::trace_csv(m.trace));
    }
    if (summary != nullptr) {
      double eta_coll = 0.0;
      for (const hierctl::TraceRow& row : m.trace) {
        eta_coll = std::max(eta_coll, row.importances[hierctl::index_of(hierctl::StackTask::kCollision)]);
      }
      *summary = {m.trace.size(), m.converged ? 1 : 0, m.aborted ? 1 : 0, m.final_time, m.max_command_step,
                  eta_coll};
    }
    if (m.aborted) {
      return fail(HIERCTL_ERR_NUMERIC, m.abort_reason);
    }
    return HIERCTL_OK;
  });
}

hierctl_status hierctl_consistency_run(const hierctl_config* config, const char* energy_csv,
                                       const char* dyncon_csv, hierctl_consistency_summary* summary) {
  REQUIRE_ARG(config != nullptr, "config must not be NULL");
  return guarded([&] {
    const hierctl::RunConfig& cfg = config->config;
    cfg.validate();
    const hierctl::QuinticTrajectory trajectory(forward_kinematics(cfg.chain, cfg.experiment_start_q),
                                                cfg.experiment_goal, cfg.experiment_duration);
    const hierctl::LabeledTraces energy =
        hierctl::energy_mapping_experiment(cfg.chain, trajectory, cfg.experiment_start_q, cfg.experiment);
    const hierctl::LabeledTraces dyncon =
        hierctl::consistency_experiment(cfg.chain, trajectory, cfg.experiment_start_q, cfg.experiment);
    if (energy_csv != nullptr) {
      hierctl::write_text_file(energy_csv, hierctl::labeled_traces_csv(energy));
    }
    if (dyncon_csv != nullptr) {
      hierctl::write_text_file(dyncon_csv, hierctl::labeled_traces_csv(dyncon));
    }
    if (summary != nullptr) {
      hierctl_consistency_summary s{};
      s.max_constraint_residual = std::max(energy.max_constraint_residual, dyncon.max_constraint_residual);
      const auto& vel = energy.values[1];
      const auto& opt = energy.values[4];
      for (std::size_t k = 0; k < vel.size(); ++k) {
        const double scale = std::max({std::abs(vel[k]), std::abs(opt[k]), 1e-300});
        if (vel[k] != opt[k]) {
          s.max_relative_gap_vel_accopt = std::max(s.max_relative_gap_vel_accopt, std::abs(vel[k] - opt[k]) / scale);
        }
      }
      s.energy_order_violations =
          static_cast<size_t>(std::count(energy.flagged.begin(), energy.flagged.end(), true));
      for (std::size_t i = 0; i < 6; ++i) {
        s.max_dyncon[i] = max_of(dyncon.values[i]);
      }
      s.samples = energy.time.size();
      *summary = s;
    }
    return HIERCTL_OK;
  });
}

hierctl_status hierctl_perf_run(const hierctl_config* config, const char* json_path,
                                hierctl_perf_summary* summary) {
  REQUIRE_ARG(config != nullptr, "config must not be NULL");
  return guarded([&] {
    const hierctl::PerfReport r = hierctl::run_perf(config->config);
    if (json_path != nullptr) {
      hierctl::write_text_file(json_path, hierctl::perf_json(r));
    }
    if (summary != nullptr) {
      *summary = {r.dof,       r.cycles, r.repeats, r.active_tasks,      r.mean_active_tasks,
                  r.mean_ms,   r.median_ms, r.p99_ms, r.max_ms, r.repeat_stddev_ms};
    }
    return HIERCTL_OK;
  });
}

hierctl_status hierctl_controller_create(const hierctl_config* config, const char* preset,
                                         const double* start_q, const double* goal, const double* obstacles,
                                         size_t n_obstacles, hierctl_controller** out) {
  REQUIRE_ARG(config != nullptr && preset != nullptr && start_q != nullptr && goal != nullptr && out != nullptr,
              "config, preset, start_q, goal and out must not be NULL");
  REQUIRE_ARG(n_obstacles == 0 || obstacles != nullptr, "obstacles must not be NULL");
  return guarded([&] {
    const auto p = hierctl::find_preset(preset);
    if (!p) {
      throw hierctl::InputError(std::string("unknown preset '") + preset + "'");
    }
    auto ctl = std::make_unique<hierctl_controller>();
    ctl->config = config->config;
    const auto n = static_cast<Eigen::Index>(ctl->config.chain.dof());
    const hierctl::Vector q0 = Eigen::Map<const hierctl::Vector>(start_q, n);
    hierctl::WorldModel world;
    world.start = forward_kinematics(ctl->config.chain, q0);
    world.goal = Eigen::Vector2d(goal[0], goal[1]);
    for (size_t i = 0; i < n_obstacles; ++i) {
      world.obstacles.push_back({Eigen::Vector2d(obstacles[3 * i], obstacles[3 * i + 1]), obstacles[3 * i + 2]});
    }
    world.comfort_config = ctl->config.comfort_config;
    ctl->policy = std::make_unique<hierctl::StackPolicy>(ctl->config.chain, world, ctl->config.tasks, *p,
                                                         hierctl::PriorityMode::kMetric);
    *out = ctl.release();
    return HIERCTL_OK;
  });
}

void hierctl_controller_destroy(hierctl_controller* controller) { delete controller; }

hierctl_status hierctl_controller_step(hierctl_controller* controller, const double* q, size_t dof, double* qd,
                                       double* importances) {
  REQUIRE_ARG(controller != nullptr && q != nullptr && qd != nullptr, "controller, q and qd must not be NULL");
  REQUIRE_ARG(dof == controller->config.chain.dof(), "dof does not match the chain");
  return guarded([&] {
    const hierctl::Vector qv = Eigen::Map<const hierctl::Vector>(q, static_cast<Eigen::Index>(dof));
    hierctl::StackEvaluation eval;
    const hierctl::ControlCommand cmd = controller->policy->cycle(qv, &eval);
    Eigen::Map<hierctl::Vector>(qd, static_cast<Eigen::Index>(dof)) = cmd.qd_desired;
    if (importances != nullptr) {
      for (std::size_t i = 0; i < hierctl::kStackSize; ++i) {
        importances[i] = eval.tasks[i].importance;
      }
    }
    if (cmd.singular[hierctl::index_of(hierctl::StackTask::kMotion)]) {
      return fail(HIERCTL_ERR_SINGULAR, "motion task singular; its contribution was zeroed");
    }
    return HIERCTL_OK;
  });
}

}  // extern "C"
