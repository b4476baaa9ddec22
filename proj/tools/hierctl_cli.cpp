#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "hierctl/hierctl.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitCheck = 2;
constexpr int kExitNumeric = 3;

int exit_code(hierctl_status status) {
  switch (status) {
    case HIERCTL_OK:
      return kExitOk;
    case HIERCTL_ERR_INPUT:
    case HIERCTL_ERR_IO:
      return kExitUsage;
    case HIERCTL_ERR_CHECK:
      return kExitCheck;
    default:
      return kExitNumeric;
  }
}

int report(hierctl_status status, const char* what) {
  if (status != HIERCTL_OK) {
    std::cerr << "hierctl " << what << ": " << hierctl_status_name(status) << ": " << hierctl_last_error()
              << "\n";
  }
  return exit_code(status);
}

struct CommonOptions {
  std::string config_path;
  std::string chain;
  std::string out_dir;
  std::optional<double> dt;
  std::optional<std::size_t> scenarios;
  std::optional<std::uint64_t> seed;
  std::string presets;
};

unsigned thread_count() {
  if (const char* env = std::getenv("HIERCTL_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) {
        return static_cast<unsigned>(v);
      }
    } catch (const std::exception&) {
    }
    std::cerr << "ignoring invalid HIERCTL_THREADS=" << env << "\n";
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Owning wrapper so every exit path releases the handle.
struct ConfigHandle {
  hierctl_config* ptr = nullptr;
  ~ConfigHandle() { hierctl_config_destroy(ptr); }
};

hierctl_status build_config(const CommonOptions& opts, ConfigHandle& cfg) {
  hierctl_status s = opts.config_path.empty() ? hierctl_config_create(nullptr, &cfg.ptr)
                                              : hierctl_config_load(opts.config_path.c_str(), &cfg.ptr);
  if (s != HIERCTL_OK) return s;
  if (!opts.chain.empty() && (s = hierctl_config_set_chain(cfg.ptr, opts.chain.c_str())) != HIERCTL_OK) return s;
  if (opts.dt && (s = hierctl_config_set_dt(cfg.ptr, *opts.dt)) != HIERCTL_OK) return s;
  if (opts.scenarios && (s = hierctl_config_set_scenarios(cfg.ptr, *opts.scenarios)) != HIERCTL_OK) return s;
  if (opts.seed && (s = hierctl_config_set_seed(cfg.ptr, *opts.seed)) != HIERCTL_OK) return s;
  if (!opts.presets.empty() && (s = hierctl_config_set_presets(cfg.ptr, opts.presets.c_str())) != HIERCTL_OK)
    return s;
  if (!opts.out_dir.empty() && (s = hierctl_config_set_output_dir(cfg.ptr, opts.out_dir.c_str())) != HIERCTL_OK)
    return s;
  return hierctl_config_set_threads(cfg.ptr, thread_count());
}

std::optional<std::string> output_dir(hierctl_config* cfg) {
  const char* dir = nullptr;
  hierctl_config_output_dir(cfg, &dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    std::cerr << "hierctl: cannot create output directory " << dir << ": " << ec.message() << "\n";
    return std::nullopt;
  }
  return std::string(dir);
}

int cmd_bench(const CommonOptions& opts, bool check) {
  ConfigHandle cfg;
  if (const hierctl_status s = build_config(opts, cfg); s != HIERCTL_OK) return report(s, "bench");
  const auto dir = output_dir(cfg.ptr);
  if (!dir) return kExitUsage;

  hierctl_bench_result* result = nullptr;
  hierctl_status s = hierctl_bench_run(cfg.ptr, &result);
  if (s != HIERCTL_OK) return report(s, "bench");
  const char* text = nullptr;
  hierctl_bench_table_text(result, &text);
  std::cout << text;
  s = hierctl_bench_write_json(result, (*dir + "/bench.json").c_str());
  if (s == HIERCTL_OK) {
    std::FILE* f = std::fopen((*dir + "/bench.txt").c_str(), "w");
    if (f != nullptr) {
      std::fputs(text, f);
      std::fclose(f);
    }
  }
  if (s == HIERCTL_OK && check) {
    s = hierctl_bench_check(result);
    std::cout << (s == HIERCTL_OK ? "check: pass\n" : "check: FAIL\n");
  }
  hierctl_bench_destroy(result);
  return report(s, "bench");
}

int cmd_trace(const CommonOptions& opts, const std::string& scenario, bool snap) {
  ConfigHandle cfg;
  if (const hierctl_status s = build_config(opts, cfg); s != HIERCTL_OK) return report(s, "trace");
  const auto dir = output_dir(cfg.ptr);
  if (!dir) return kExitUsage;
  const std::string path = *dir + "/trace_" + scenario + (snap ? "_snap" : "") + ".csv";
  hierctl_trace_summary summary{};
  const hierctl_status s = hierctl_trace_run(cfg.ptr, scenario.c_str(), snap ? 1 : 0, path.c_str(), &summary);
  if (s == HIERCTL_OK) {
    std::printf("%s: %zu rows, converged %d, t_end %.3f s, max |dqd|_inf per step %.6g rad/s, max eta_coll %.4g\n",
                path.c_str(), summary.rows, summary.converged, summary.final_time, summary.max_command_step,
                summary.max_eta_coll);
  }
  return report(s, "trace");
}

int cmd_consistency(const CommonOptions& opts) {
  ConfigHandle cfg;
  if (const hierctl_status s = build_config(opts, cfg); s != HIERCTL_OK) return report(s, "consistency");
  const auto dir = output_dir(cfg.ptr);
  if (!dir) return kExitUsage;
  hierctl_consistency_summary sum{};
  const hierctl_status s = hierctl_consistency_run(cfg.ptr, (*dir + "/energy.csv").c_str(),
                                                   (*dir + "/dyncon.csv").c_str(), &sum);
  if (s == HIERCTL_OK) {
    std::printf("samples %zu\n", sum.samples);
    std::printf("max |J qd - xd| %.3g\n", sum.max_constraint_residual);
    std::printf("max relative gap vel_W=M vs accopt_W=M %.3g\n", sum.max_relative_gap_vel_accopt);
    std::printf("samples with W=M energy above vel_W=I %zu\n", sum.energy_order_violations);
    const char* labels[6] = {"torque_W=M", "torque_W=I", "velocity_W=M", "velocity_W=I", "acceleration_W=M",
                             "acceleration_W=I"};
    for (int i = 0; i < 6; ++i) {
      std::printf("max dyncon %-17s %.6g\n", labels[i], sum.max_dyncon[i]);
    }
  }
  return report(s, "consistency");
}

int cmd_perf(CommonOptions opts) {
  if (opts.chain.empty() && opts.config_path.empty()) {
    opts.chain = "planar7";
  }
  ConfigHandle cfg;
  if (const hierctl_status s = build_config(opts, cfg); s != HIERCTL_OK) return report(s, "perf");
  const auto dir = output_dir(cfg.ptr);
  if (!dir) return kExitUsage;
  hierctl_perf_summary p{};
  const hierctl_status s = hierctl_perf_run(cfg.ptr, (*dir + "/perf.json").c_str(), &p);
  if (s == HIERCTL_OK) {
    std::printf("dof %zu, %zu active tasks at start (%.2f on average), %zu cycles x %zu repeats\n", p.dof,
                p.active_tasks, p.mean_active_tasks, p.cycles, p.repeats);
    std::printf("mean %.4f ms, median %.4f ms, p99 %.4f ms, max %.4f ms, repeat stddev %.4f ms\n", p.mean_ms,
                p.median_ms, p.p99_ms, p.max_ms, p.repeat_stddev_ms);
  }
  return report(s, "perf");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchical velocity control benchmarks"};
  app.require_subcommand(1);
  CommonOptions opts;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--chain", opts.chain, "chain preset: planar4, planar7");
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_option("--dt", opts.dt, "integration step [s]");
  };

  bool check = false;
  CLI::App* bench = app.add_subcommand("bench", "paired Monte-Carlo benchmark of controller presets");
  add_common(bench);
  bench->add_option("--presets", opts.presets, "all, extended or a comma-separated list");
  bench->add_option("--scenarios", opts.scenarios, "number of sampled scenarios");
  bench->add_option("--seed", opts.seed, "scenario seed");
  bench->add_flag("--check", check, "exit 2 when the expected preset orderings do not hold");

  std::string scenario = "obstacle";
  bool snap = false;
  CLI::App* trace = app.add_subcommand("trace", "single task-stack run with a full CSV trace");
  add_common(trace);
  trace->add_option("--scenario", scenario, "free, obstacle or a sampled scenario index");
  trace->add_option("--seed", opts.seed, "seed for sampled scenarios");
  trace->add_flag("--snap", snap, "round importances to 0/1 (discontinuous baseline)");

  CLI::App* consistency = app.add_subcommand("consistency", "energy mapping and dynamic consistency traces");
  add_common(consistency);

  CLI::App* perf = app.add_subcommand("perf", "control-cycle timing on the task stack");
  add_common(perf);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (bench->parsed()) return cmd_bench(opts, check);
  if (trace->parsed()) return cmd_trace(opts, scenario, snap);
  if (consistency->parsed()) return cmd_consistency(opts);
  return cmd_perf(opts);
}
