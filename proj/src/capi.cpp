// Copyright 2026 The ctsdr Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctsdr/ctsdr.h"

#include "ctsdr/analysis.hpp"
#include "ctsdr/drill_sim.hpp"
#include "ctsdr/error.hpp"
#include "ctsdr/json_io.hpp"
#include "ctsdr/kinematics.hpp"
#include "ctsdr/phantom.hpp"
#include "ctsdr/planner.hpp"
#include "ctsdr/server.hpp"
#include "ctsdr/session.hpp"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <sstream>

struct ctsdr_config {
  ctsdr::RobotConfig config;
};

struct ctsdr_run {
  ctsdr::RobotConfig config;
  ctsdr::ScenarioScript script;
  ctsdr::RunRecord record;
  double voxel_size = ctsdr::kDefaultVoxelSize;
};

struct ctsdr_session {
  ctsdr::Session session;
};

struct ctsdr_server {
  std::unique_ptr<ctsdr::Server> server;
};

namespace {

namespace fs = std::filesystem;
using ctsdr::Error;
using ctsdr::ErrorCode;
using ctsdr::Json;

thread_local std::string g_last_error;

ctsdr_status fail(ctsdr_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <typename F>
ctsdr_status guarded(F&& body) {
  g_last_error.clear();
  try {
    return body();
  } catch (const Error& e) {
    return fail(static_cast<ctsdr_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(CTSDR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CTSDR_INTERNAL, e.what());
  } catch (...) {
    return fail(CTSDR_INTERNAL, "unknown failure");
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

ctsdr::JointState joints_from(const double* q) {
  ctsdr::JointState j;
  j.outer_translation = q[CTSDR_OUTER_TRANSLATION];
  j.inner_translation = q[CTSDR_INNER_TRANSLATION];
  j.outer_roll = q[CTSDR_OUTER_ROLL];
  j.inner_roll = q[CTSDR_INNER_ROLL];
  j.spindle = q[CTSDR_SPINDLE];
  return j;
}

Json parse_json(const char* text, const char* what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::MalformedConfig, std::string(what) + ": " + e.what());
  }
}

std::string ndjson(const std::vector<Json>& messages) {
  std::string out;
  for (const auto& m : messages) out += ctsdr::to_wire(m) + "\n";
  return out;
}

ctsdr::MetricsReport run_metrics(const ctsdr_run& run, const ctsdr::IdealParameters& ideal) {
  const ctsdr::RunRecord one[1] = {run.record};
  return ctsdr::metrics_report(std::span<const ctsdr::RunRecord>(one, 1), ideal);
}

ctsdr_status finish_run(const ctsdr::RobotConfig& config, ctsdr::ScenarioScript script, double dt, double voxel_size,
                        ctsdr_run** out) {
  require(out != nullptr, "out is null");
  *out = nullptr;
  require(dt > 0.0, "dt must be positive");
  require(voxel_size > 0.0, "voxel_size must be positive");
  auto phantom =
      std::make_shared<ctsdr::VoxelPhantom>(ctsdr::default_scenario_phantom(config.sheath.pose, voxel_size));
  auto run = std::make_unique<ctsdr_run>();
  run->config = config;
  run->voxel_size = voxel_size;
  run->record = ctsdr::run_scenario(script, config, phantom, ctsdr::RunOptions{dt});
  run->script = std::move(script);
  const bool faulted = run->record.faulted;
  std::string reason;
  if (faulted) {
    const ctsdr::RunEvent* e = run->record.find_event(ctsdr::event::kFault);
    reason = e != nullptr ? e->message : "run faulted";
  }
  *out = run.release();
  return faulted ? fail(CTSDR_RUN_FAULT, reason) : CTSDR_OK;
}

template <typename Write>
void write_file(const fs::path& path, Write&& write, bool binary = false) {
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) throw Error(ErrorCode::Io, "cannot write " + path.string());
  write(os);
  if (!os) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace

extern "C" {

const char* ctsdr_version(void) { return "0.1.0"; }

const char* ctsdr_status_name(ctsdr_status status) {
  switch (status) {
    case CTSDR_OK: return "ok";
    case CTSDR_INTERNAL: return "internal error";
    default: break;
  }
  if (status >= CTSDR_INVALID_ARGUMENT && status <= CTSDR_BUDGET) {
    return ctsdr::to_string(static_cast<ErrorCode>(status));
  }
  return "unknown status";
}

const char* ctsdr_last_error(void) { return g_last_error.c_str(); }

void ctsdr_string_free(char* s) { std::free(s); }

ctsdr_status ctsdr_config_default(ctsdr_config** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = new ctsdr_config{ctsdr::default_robot_config()};
    return CTSDR_OK;
  });
}

ctsdr_status ctsdr_config_load(const char* path, ctsdr_config** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path and out are required");
    *out = nullptr;
    *out = new ctsdr_config{ctsdr::load_config(path)};
    return CTSDR_OK;
  });
}

ctsdr_status ctsdr_config_from_json(const char* json, ctsdr_config** out) {
  return guarded([&] {
    require(json != nullptr && out != nullptr, "json and out are required");
    *out = nullptr;
    *out = new ctsdr_config{ctsdr::config_from_json(parse_json(json, "config"))};
    return CTSDR_OK;
  });
}

ctsdr_status ctsdr_config_to_json(const ctsdr_config* config, char** json_out) {
  return guarded([&] {
    require(config != nullptr && json_out != nullptr, "config and json_out are required");
    *json_out = copy_string(ctsdr::to_json(config->config).dump(2));
    return CTSDR_OK;
  });
}

ctsdr_status ctsdr_config_validate(const ctsdr_config* config, int* valid, char** report_json) {
  return guarded([&] {
    require(config != nullptr && valid != nullptr, "config and valid are required");
    const auto report = ctsdr::validate_config(config->config);
    *valid = report.valid() ? 1 : 0;
    if (report_json != nullptr) *report_json = copy_string(ctsdr::to_json(report).dump(2));
    return CTSDR_OK;
  });
}

ctsdr_status ctsdr_config_set_runout(ctsdr_config* config, double runout_mm) {
  return guarded([&] {
    require(config != nullptr, "config is null");
    require(runout_mm >= 0.0, "runout must be non-negative");
    config->config.bit.runout = runout_mm;
    return CTSDR_OK;
  });
}

ctsdr_status ctsdr_config_set_stiffness_ratio(ctsdr_config* config, double ratio) {
  return guarded([&] {
    require(config != nullptr, "config is null");
    if (ratio > 0.0) {
      config->config.effective_stiffness_ratio = ratio;
    } else {
      config->config.effective_stiffness_ratio.reset();
    }
    return CTSDR_OK;
  });
}

void ctsdr_config_free(ctsdr_config* config) { delete config; }

ctsdr_status ctsdr_forward_kinematics(const ctsdr_config* config, const double* joints, double sample_step,
                                      double* tip_out, char** centerline_csv) {
  return guarded([&] {
    require(config != nullptr && joints != nullptr && tip_out != nullptr, "config, joints and tip_out are required");
    const auto fk = ctsdr::forward_kinematics(config->config, joints_from(joints), sample_step);
    for (int i = 0; i < 3; ++i) tip_out[i] = fk.tip.origin(i);
    if (centerline_csv != nullptr) {
      std::ostringstream os;
      ctsdr::write_centerline_csv(os, fk.centerline);
      *centerline_csv = copy_string(os.str());
    }
    return CTSDR_OK;
  });
}

ctsdr_status ctsdr_scenario_names(const ctsdr_config* config, char** json_out) {
  return guarded([&] {
    require(config != nullptr && json_out != nullptr, "config and json_out are required");
    Json list = Json::array();
    for (const auto& s : ctsdr::builtin_scenarios(config->config)) {
      list.push_back({{"name", s.name}, {"description", s.description}});
    }
    *json_out = copy_string(list.dump(2));
    return CTSDR_OK;
  });
}

ctsdr_status ctsdr_run_scenario(const ctsdr_config* config, const char* name, double dt, double voxel_size,
                                ctsdr_run** out) {
  return guarded([&] {
    require(config != nullptr && name != nullptr, "config and name are required");
    return finish_run(config->config, ctsdr::find_scenario(name, config->config), dt, voxel_size, out);
  });
}

ctsdr_status ctsdr_run_script(const ctsdr_config* config, const char* script_json, double dt, double voxel_size,
                              ctsdr_run** out) {
  return guarded([&] {
    require(config != nullptr && script_json != nullptr, "config and script_json are required");
    return finish_run(config->config, ctsdr::script_from_json(parse_json(script_json, "script")), dt, voxel_size,
                      out);
  });
}

int ctsdr_run_faulted(const ctsdr_run* run) { return run != nullptr && run->record.faulted ? 1 : 0; }

ctsdr_status ctsdr_run_final_joints(const ctsdr_run* run, double* joints_out) {
  return guarded([&] {
    require(run != nullptr && joints_out != nullptr, "run and joints_out are required");
    const auto q = run->record.final_joints();
    joints_out[CTSDR_OUTER_TRANSLATION] = q.outer_translation;
    joints_out[CTSDR_INNER_TRANSLATION] = q.inner_translation;
    joints_out[CTSDR_OUTER_ROLL] = q.outer_roll;
    joints_out[CTSDR_INNER_ROLL] = q.inner_roll;
    joints_out[CTSDR_SPINDLE] = q.spindle;
    return CTSDR_OK;
  });
}

ctsdr_status ctsdr_run_insertion_time(const ctsdr_run* run, double* seconds) {
  return guarded([&] {
    require(run != nullptr && seconds != nullptr, "run and seconds are required");
    const auto t = run->record.insertion_time();
    if (!t) return fail(CTSDR_NO_TUNNEL, "the run never cut material");
    *seconds = *t;
    return CTSDR_OK;
  });
}

ctsdr_status ctsdr_run_summary_json(const ctsdr_run* run, char** json_out) {
  return guarded([&] {
    require(run != nullptr && json_out != nullptr, "run and json_out are required");
    *json_out = copy_string(ctsdr::run_summary(run->record).dump(2));
    return CTSDR_OK;
  });
}

ctsdr_status ctsdr_run_events_json(const ctsdr_run* run, char** json_out) {
  return guarded([&] {
    require(run != nullptr && json_out != nullptr, "run and json_out are required");
    *json_out = copy_string(ctsdr::to_json(std::span<const ctsdr::RunEvent>(run->record.events)).dump(2));
    return CTSDR_OK;
  });
}

ctsdr_status ctsdr_run_metrics(const ctsdr_run* run, const char* ideal_json, char** json_out, char** table_out) {
  return guarded([&] {
    require(run != nullptr, "run is null");
    const ctsdr::IdealParameters ideal =
        ideal_json != nullptr ? ctsdr::ideal_from_json(parse_json(ideal_json, "ideal"))
                              : ctsdr::ideal_from_joints(run->config, run->record.final_joints());
    const auto report = run_metrics(*run, ideal);
    if (json_out != nullptr) *json_out = copy_string(ctsdr::to_json(report).dump(2));
    if (table_out != nullptr) {
      std::ostringstream os;
      ctsdr::write_metrics_table(os, report);
      *table_out = copy_string(os.str());
    }
    return CTSDR_OK;
  });
}

ctsdr_status ctsdr_run_write_outputs(const ctsdr_run* run, const char* dir, int write_snapshot) {
  return guarded([&] {
    require(run != nullptr && dir != nullptr, "run and dir are required");
    const fs::path out(dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + out.string() + ": " + ec.message());
    const auto& rec = run->record;

    write_file(out / "timeline.csv", [&](std::ostream& os) { ctsdr::write_timeline_csv(os, rec); });
    write_file(out / "events.json", [&](std::ostream& os) {
      os << ctsdr::to_json(std::span<const ctsdr::RunEvent>(rec.events)).dump(2) << '\n';
    });
    write_file(out / "tip_locus.csv", [&](std::ostream& os) { ctsdr::write_centerline_csv(os, rec.tip_locus); });
    write_file(out / "centerline.csv", [&](std::ostream& os) {
      ctsdr::write_centerline_csv(os, ctsdr::forward_kinematics(run->config, rec.final_joints()).centerline);
    });
    for (ctsdr::Axis axis : {ctsdr::Axis::X, ctsdr::Axis::Y, ctsdr::Axis::Z}) {
      const fs::path p = out / (std::string("projection_") + ctsdr::to_string(axis) + ".pgm");
      write_file(p, [&](std::ostream& os) { ctsdr::write_pgm(os, ctsdr::project(*rec.phantom, axis)); }, true);
    }
    const auto report = run_metrics(*run, ctsdr::ideal_from_joints(run->config, rec.final_joints()));
    ctsdr::write_json_file(out / "metrics.json", ctsdr::to_json(report));
    write_file(out / "metrics.txt", [&](std::ostream& os) { ctsdr::write_metrics_table(os, report); });
    ctsdr::write_json_file(out / "run.json", Json{{"summary", ctsdr::run_summary(rec)},
                                                  {"voxel_size", run->voxel_size},
                                                  {"config", ctsdr::to_json(run->config)},
                                                  {"script", ctsdr::to_json(run->script)}});
    if (write_snapshot != 0) ctsdr::write_snapshot(*rec.phantom, out / "phantom.bits", out / "phantom.json");
    return CTSDR_OK;
  });
}

void ctsdr_run_free(ctsdr_run* run) { delete run; }

ctsdr_status ctsdr_analyze(const ctsdr_config* config, const char* const* run_dirs, size_t count,
                           const char* ideal_json, char** report_json, char** table_out) {
  return guarded([&] {
    require(config != nullptr && run_dirs != nullptr && count > 0, "config and at least one run directory required");
    std::vector<ctsdr::RunObservation> runs;
    std::optional<ctsdr::IdealParameters> ideal;
    if (ideal_json != nullptr) ideal = ctsdr::ideal_from_json(parse_json(ideal_json, "ideal"));
    for (size_t i = 0; i < count; ++i) {
      require(run_dirs[i] != nullptr, "null run directory");
      const fs::path dir(run_dirs[i]);
      std::ifstream locus(dir / "tip_locus.csv");
      if (!locus) throw Error(ErrorCode::Io, "cannot read " + (dir / "tip_locus.csv").string());
      ctsdr::RunObservation obs;
      obs.label = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();
      obs.locus = ctsdr::read_centerline_csv(locus);
      if (fs::exists(dir / "phantom.bits") && fs::exists(dir / "phantom.json")) {
        obs.phantom = std::make_shared<const ctsdr::VoxelPhantom>(
            ctsdr::read_snapshot(dir / "phantom.bits", dir / "phantom.json"));
      }
      if (!ideal && fs::exists(dir / "run.json")) {
        const Json run = ctsdr::read_json_file(dir / "run.json");
        if (run.contains("summary") && run["summary"].contains("final_joints")) {
          ideal = ctsdr::ideal_from_joints(config->config, ctsdr::joints_from_json(run["summary"]["final_joints"]));
        }
      }
      runs.push_back(std::move(obs));
    }
    const auto report = ctsdr::metrics_report(std::span<const ctsdr::RunObservation>(runs),
                                              ideal.value_or(ctsdr::IdealParameters{}));
    if (report_json != nullptr) *report_json = copy_string(ctsdr::to_json(report).dump(2));
    if (table_out != nullptr) {
      std::ostringstream os;
      ctsdr::write_metrics_table(os, report);
      *table_out = copy_string(os.str());
    }
    return CTSDR_OK;
  });
}

ctsdr_status ctsdr_calibrate_stiffness_ratio(double observed_radius, double precurvature_radius, double* ratio_out) {
  return guarded([&] {
    require(ratio_out != nullptr, "ratio_out is null");
    *ratio_out = ctsdr::calibrate_stiffness_ratio(observed_radius, precurvature_radius);
    return CTSDR_OK;
  });
}

ctsdr_status ctsdr_calibrate_runout(double observed_diameter, double bit_diameter, double* runout_out) {
  return guarded([&] {
    require(runout_out != nullptr, "runout_out is null");
    *runout_out = ctsdr::calibrate_runout(observed_diameter, bit_diameter);
    return CTSDR_OK;
  });
}

ctsdr_status ctsdr_plan(const ctsdr_config* config, const char* request_json, char** result_json,
                        char** script_json) {
  return guarded([&] {
    require(config != nullptr && request_json != nullptr && result_json != nullptr,
            "config, request_json and result_json are required");
    *result_json = nullptr;
    const auto request = ctsdr::plan_request_from_json(parse_json(request_json, "plan request"));
    try {
      const auto result = ctsdr::plan_s_shape(request, config->config);
      *result_json = copy_string(ctsdr::to_json(result).dump(2));
      if (script_json != nullptr) *script_json = copy_string(ctsdr::to_json(result.script).dump(2));
    } catch (const ctsdr::UnreachableError& e) {
      *result_json = copy_string(Json{{"error", e.what()}, {"best", ctsdr::to_json(e.best())}}.dump(2));
      return fail(CTSDR_UNREACHABLE, e.what());
    }
    return CTSDR_OK;
  });
}

ctsdr_status ctsdr_session_create(const ctsdr_config* config, const char* id, double tile_rate, double voxel_size,
                                  ctsdr_session** out) {
  return guarded([&] {
    require(config != nullptr && id != nullptr && out != nullptr, "config, id and out are required");
    *out = nullptr;
    ctsdr::SessionOptions options;
    options.tile_rate = tile_rate;
    if (voxel_size > 0.0) options.voxel_size = voxel_size;
    *out = new ctsdr_session{ctsdr::Session(id, config->config, options)};
    return CTSDR_OK;
  });
}

ctsdr_status ctsdr_session_handle(ctsdr_session* session, const char* line, char** replies) {
  return guarded([&] {
    require(session != nullptr && line != nullptr && replies != nullptr, "session, line and replies are required");
    *replies = copy_string(ndjson(session->session.handle_line(line)));
    return CTSDR_OK;
  });
}

ctsdr_status ctsdr_session_tick(ctsdr_session* session, char** messages) {
  return guarded([&] {
    require(session != nullptr && messages != nullptr, "session and messages are required");
    *messages = copy_string(ndjson(session->session.tick()));
    return CTSDR_OK;
  });
}

void ctsdr_session_free(ctsdr_session* session) { delete session; }

ctsdr_status ctsdr_server_start(const ctsdr_config* config, const char* host, int port, ctsdr_server** out) {
  return guarded([&] {
    require(config != nullptr && host != nullptr && out != nullptr, "config, host and out are required");
    require(port >= 0 && port <= 65535, "port out of range");
    *out = nullptr;
    ctsdr::ServerOptions options;
    options.host = host;
    options.port = static_cast<unsigned short>(port);
    options.config = config->config;
    auto server = std::make_unique<ctsdr::Server>(options);
    server->start();
    *out = new ctsdr_server{std::move(server)};
    return CTSDR_OK;
  });
}

ctsdr_status ctsdr_server_port(const ctsdr_server* server, int* port) {
  return guarded([&] {
    require(server != nullptr && port != nullptr, "server and port are required");
    *port = server->server->port();
    return CTSDR_OK;
  });
}

ctsdr_status ctsdr_server_wait(ctsdr_server* server) {
  return guarded([&] {
    require(server != nullptr, "server is null");
    server->server->wait_for_signal();
    return CTSDR_OK;
  });
}

ctsdr_status ctsdr_server_stop(ctsdr_server* server) {
  return guarded([&] {
    require(server != nullptr, "server is null");
    server->server->stop();
    return CTSDR_OK;
  });
}

void ctsdr_server_free(ctsdr_server* server) { delete server; }

}  // extern "C"
