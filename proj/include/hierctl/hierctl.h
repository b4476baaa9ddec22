#ifndef HIERCTL_H
#define HIERCTL_H

#include <stddef.h>
#include <stdint.h>

#if defined(HIERCTL_BUILDING_LIBRARY)
#define HIERCTL_API __attribute__((visibility("default")))
#else
#define HIERCTL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hierctl_status {
  HIERCTL_OK = 0,
  HIERCTL_ERR_INPUT = 1,
  HIERCTL_ERR_SINGULAR = 2,
  HIERCTL_ERR_IO = 3,
  HIERCTL_ERR_NUMERIC = 4,
  HIERCTL_ERR_CHECK = 5,
  HIERCTL_ERR_INTERNAL = 6
} hierctl_status;

typedef struct hierctl_config hierctl_config;
typedef struct hierctl_bench_result hierctl_bench_result;
typedef struct hierctl_controller hierctl_controller;

/* Message of the last failed call on this thread; never NULL. */
HIERCTL_API const char* hierctl_last_error(void);
HIERCTL_API const char* hierctl_version(void);
HIERCTL_API const char* hierctl_status_name(hierctl_status status);

/* chain: "planar4" or "planar7"; NULL selects planar4. */
HIERCTL_API hierctl_status hierctl_config_create(const char* chain, hierctl_config** out);
HIERCTL_API hierctl_status hierctl_config_load(const char* path, hierctl_config** out);
HIERCTL_API void hierctl_config_destroy(hierctl_config* config);

HIERCTL_API hierctl_status hierctl_config_set_chain(hierctl_config* config, const char* chain);
HIERCTL_API hierctl_status hierctl_config_set_scenarios(hierctl_config* config, size_t scenarios);
HIERCTL_API hierctl_status hierctl_config_set_seed(hierctl_config* config, uint64_t seed);
HIERCTL_API hierctl_status hierctl_config_set_dt(hierctl_config* config, double dt);
HIERCTL_API hierctl_status hierctl_config_set_threads(hierctl_config* config, unsigned threads);
/* Comma-separated preset names, "all" (the seven hierarchy presets) or
   "extended" (all presets including the closed-form two-task laws). */
HIERCTL_API hierctl_status hierctl_config_set_presets(hierctl_config* config, const char* presets);
HIERCTL_API hierctl_status hierctl_config_set_output_dir(hierctl_config* config, const char* dir);
/* Pointer stays valid until the config changes or is destroyed. */
HIERCTL_API hierctl_status hierctl_config_output_dir(const hierctl_config* config, const char** dir);
HIERCTL_API hierctl_status hierctl_config_dof(const hierctl_config* config, size_t* dof);

typedef struct hierctl_bench_row {
  const char* preset; /* owned by the result */
  double mean_ekin;
  double mean_l;
  double mean_sum;
  size_t n_completed;
} hierctl_bench_row;

HIERCTL_API hierctl_status hierctl_bench_run(const hierctl_config* config, hierctl_bench_result** out);
HIERCTL_API void hierctl_bench_destroy(hierctl_bench_result* result);
HIERCTL_API hierctl_status hierctl_bench_row_count(const hierctl_bench_result* result, size_t* count);
HIERCTL_API hierctl_status hierctl_bench_get_row(const hierctl_bench_result* result, size_t index,
                                                 hierctl_bench_row* row);
HIERCTL_API hierctl_status hierctl_bench_excluded(const hierctl_bench_result* result, size_t* excluded);
/* HIERCTL_ERR_CHECK when a preset ordering is violated; details in
   hierctl_last_error(). */
HIERCTL_API hierctl_status hierctl_bench_check(const hierctl_bench_result* result);
HIERCTL_API hierctl_status hierctl_bench_table_text(const hierctl_bench_result* result, const char** text);
HIERCTL_API hierctl_status hierctl_bench_write_json(const hierctl_bench_result* result, const char* path);

typedef struct hierctl_trace_summary {
  size_t rows;
  int converged;
  int aborted;
  double final_time;
  double max_command_step; /* max over steps of the infinity norm of the command change */
  double max_eta_coll;
} hierctl_trace_summary;

/* scenario: "free", "obstacle", a configured name or a sampled index.
   snap != 0 rounds importances to {0, 1}. csv_path may be NULL. */
HIERCTL_API hierctl_status hierctl_trace_run(const hierctl_config* config, const char* scenario, int snap,
                                             const char* csv_path, hierctl_trace_summary* summary);

typedef struct hierctl_consistency_summary {
  double max_constraint_residual;
  double max_relative_gap_vel_accopt; /* W = M velocity vs energy-optimal acceleration mapping */
  size_t energy_order_violations;  /* samples where a W = M trace exceeds the W = I velocity trace */
  double max_dyncon[6];            /* torque M, torque I, velocity M, velocity I, accel M, accel I */
  size_t samples;
} hierctl_consistency_summary;

HIERCTL_API hierctl_status hierctl_consistency_run(const hierctl_config* config, const char* energy_csv,
                                                   const char* dyncon_csv,
                                                   hierctl_consistency_summary* summary);

typedef struct hierctl_perf_summary {
  size_t dof;
  size_t cycles;
  size_t repeats;
  size_t active_tasks;      /* importance > 0 at the first cycle */
  double mean_active_tasks; /* averaged over the timed cycles */
  double mean_ms;
  double median_ms;
  double p99_ms;
  double max_ms;
  double repeat_stddev_ms;
} hierctl_perf_summary;

HIERCTL_API hierctl_status hierctl_perf_run(const hierctl_config* config, const char* json_path,
                                            hierctl_perf_summary* summary);

/* Four-task stack controller. goal: 2 doubles. obstacles: n_obstacles
   triples (x, y, radius). start_q: dof doubles. */
HIERCTL_API hierctl_status hierctl_controller_create(const hierctl_config* config, const char* preset,
                                                     const double* start_q, const double* goal,
                                                     const double* obstacles, size_t n_obstacles,
                                                     hierctl_controller** out);
HIERCTL_API void hierctl_controller_destroy(hierctl_controller* controller);
/* One control cycle: q (dof) -> qd (dof), importances (4, may be NULL). */
HIERCTL_API hierctl_status hierctl_controller_step(hierctl_controller* controller, const double* q, size_t dof,
                                                   double* qd, double* importances);

#ifdef __cplusplus
}
#endif

#endif
