/* Copyright 2026 The ctsdr Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the concentric-tube drilling simulator.
 *
 * Every call returns a ctsdr_status. On failure ctsdr_last_error() holds a
 * thread-local message until the next call on the same thread. Strings
 * returned through char** are heap copies released with ctsdr_string_free.
 */
#ifndef CTSDR_CTSDR_H
#define CTSDR_CTSDR_H

#include <stddef.h>

#if defined(CTSDR_BUILDING_LIBRARY)
#define CTSDR_API __attribute__((visibility("default")))
#else
#define CTSDR_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ctsdr_status {
  CTSDR_OK = 0,
  CTSDR_INVALID_ARGUMENT = 1,
  CTSDR_CONTRACT_VIOLATION = 2,
  CTSDR_UNKNOWN_SCENARIO = 3,
  CTSDR_MALFORMED_CONFIG = 4,
  CTSDR_IO = 5,
  CTSDR_RUN_FAULT = 6,
  CTSDR_UNREACHABLE = 7,
  CTSDR_NO_TUNNEL = 8,
  CTSDR_SPLIT = 9,
  CTSDR_INFEASIBLE = 10,
  CTSDR_BUDGET = 11,
  CTSDR_INTERNAL = 99
} ctsdr_status;

typedef struct ctsdr_config ctsdr_config;
typedef struct ctsdr_run ctsdr_run;
typedef struct ctsdr_session ctsdr_session;
typedef struct ctsdr_server ctsdr_server;

/* Joint order used by every double[5] joint array. */
enum {
  CTSDR_OUTER_TRANSLATION = 0,
  CTSDR_INNER_TRANSLATION = 1,
  CTSDR_OUTER_ROLL = 2,
  CTSDR_INNER_ROLL = 3,
  CTSDR_SPINDLE = 4
};

CTSDR_API const char* ctsdr_version(void);
CTSDR_API const char* ctsdr_status_name(ctsdr_status status);
CTSDR_API const char* ctsdr_last_error(void);
CTSDR_API void ctsdr_string_free(char* s);

/* ---- configuration ---- */
CTSDR_API ctsdr_status ctsdr_config_default(ctsdr_config** out);
CTSDR_API ctsdr_status ctsdr_config_load(const char* path, ctsdr_config** out);
CTSDR_API ctsdr_status ctsdr_config_from_json(const char* json, ctsdr_config** out);
CTSDR_API ctsdr_status ctsdr_config_to_json(const ctsdr_config* config, char** json_out);
/* *valid is 1 when the report is empty; report_json may be NULL. */
CTSDR_API ctsdr_status ctsdr_config_validate(const ctsdr_config* config, int* valid, char** report_json);
CTSDR_API ctsdr_status ctsdr_config_set_runout(ctsdr_config* config, double runout_mm);
/* ratio <= 0 restores the Euler-Bernoulli stiffness ratio. */
CTSDR_API ctsdr_status ctsdr_config_set_stiffness_ratio(ctsdr_config* config, double ratio);
CTSDR_API void ctsdr_config_free(ctsdr_config* config);

/* ---- kinematics ---- */
/* joints: double[5]. tip_out: double[3]. centerline_csv may be NULL. */
CTSDR_API ctsdr_status ctsdr_forward_kinematics(const ctsdr_config* config, const double* joints, double sample_step,
                                                double* tip_out, char** centerline_csv);

/* ---- scenarios ---- */
CTSDR_API ctsdr_status ctsdr_scenario_names(const ctsdr_config* config, char** json_out);
/* Runs a builtin scenario on the default phantom. A faulted run still sets
 * *out and returns CTSDR_RUN_FAULT. */
CTSDR_API ctsdr_status ctsdr_run_scenario(const ctsdr_config* config, const char* name, double dt, double voxel_size,
                                          ctsdr_run** out);
CTSDR_API ctsdr_status ctsdr_run_script(const ctsdr_config* config, const char* script_json, double dt,
                                        double voxel_size, ctsdr_run** out);
CTSDR_API int ctsdr_run_faulted(const ctsdr_run* run);
/* joints_out: double[5]. */
CTSDR_API ctsdr_status ctsdr_run_final_joints(const ctsdr_run* run, double* joints_out);
CTSDR_API ctsdr_status ctsdr_run_insertion_time(const ctsdr_run* run, double* seconds);
CTSDR_API ctsdr_status ctsdr_run_summary_json(const ctsdr_run* run, char** json_out);
CTSDR_API ctsdr_status ctsdr_run_events_json(const ctsdr_run* run, char** json_out);
/* ideal_json NULL derives the ideal arcs from the final joints. */
CTSDR_API ctsdr_status ctsdr_run_metrics(const ctsdr_run* run, const char* ideal_json, char** json_out,
                                         char** table_out);
/* timeline.csv, events.json, tip_locus.csv, centerline.csv,
 * projection_{x,y,z}.pgm, metrics.json, metrics.txt, run.json and, when
 * write_snapshot is nonzero, phantom.bits + phantom.json. */
CTSDR_API ctsdr_status ctsdr_run_write_outputs(const ctsdr_run* run, const char* dir, int write_snapshot);
CTSDR_API void ctsdr_run_free(ctsdr_run* run);

/* ---- analysis ---- */
/* Measures run directories written by ctsdr_run_write_outputs. */
CTSDR_API ctsdr_status ctsdr_analyze(const ctsdr_config* config, const char* const* run_dirs, size_t count,
                                     const char* ideal_json, char** report_json, char** table_out);
CTSDR_API ctsdr_status ctsdr_calibrate_stiffness_ratio(double observed_radius, double precurvature_radius,
                                                       double* ratio_out);
CTSDR_API ctsdr_status ctsdr_calibrate_runout(double observed_diameter, double bit_diameter, double* runout_out);

/* ---- planning ---- */
/* On CTSDR_UNREACHABLE result_json holds the error and best candidate.
 * script_json may be NULL. */
CTSDR_API ctsdr_status ctsdr_plan(const ctsdr_config* config, const char* request_json, char** result_json,
                                  char** script_json);

/* ---- teleoperation ---- */
/* tile_rate in Hz; 0 disables projection tiles. voxel_size <= 0 uses the default. */
CTSDR_API ctsdr_status ctsdr_session_create(const ctsdr_config* config, const char* id, double tile_rate,
                                            double voxel_size, ctsdr_session** out);
/* One inbound NDJSON line; replies are NDJSON. */
CTSDR_API ctsdr_status ctsdr_session_handle(ctsdr_session* session, const char* line, char** replies);
CTSDR_API ctsdr_status ctsdr_session_tick(ctsdr_session* session, char** messages);
CTSDR_API void ctsdr_session_free(ctsdr_session* session);

/* port 0 binds a free port. */
CTSDR_API ctsdr_status ctsdr_server_start(const ctsdr_config* config, const char* host, int port,
                                          ctsdr_server** out);
CTSDR_API ctsdr_status ctsdr_server_port(const ctsdr_server* server, int* port);
/* Blocks until SIGINT/SIGTERM or ctsdr_server_stop. */
CTSDR_API ctsdr_status ctsdr_server_wait(ctsdr_server* server);
CTSDR_API ctsdr_status ctsdr_server_stop(ctsdr_server* server);
CTSDR_API void ctsdr_server_free(ctsdr_server* server);

#ifdef __cplusplus
}
#endif

#endif /* CTSDR_CTSDR_H */
