// Copyright 2026 The ctsdr Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end over the C API.

#include "ctsdr/ctsdr.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using Json = nlohmann::json;

constexpr int kUsageExit = 64;

struct Failure {
  ctsdr_status status;
};

struct OwnedString {
  char* s = nullptr;
  ~OwnedString() { ctsdr_string_free(s); }
  std::string str() const { return s != nullptr ? std::string(s) : std::string(); }
};

struct ConfigHandle {
  ctsdr_config* p = nullptr;
  ~ConfigHandle() { ctsdr_config_free(p); }
};

struct RunHandle {
  ctsdr_run* p = nullptr;
  ~RunHandle() { ctsdr_run_free(p); }
};

struct ServerHandle {
  ctsdr_server* p = nullptr;
  ~ServerHandle() { ctsdr_server_free(p); }
};

void check(ctsdr_status status, const char* what) {
  if (status == CTSDR_OK) return;
  std::cerr << "ctsdr: " << what << ": " << ctsdr_status_name(status);
  const std::string detail = ctsdr_last_error();
  if (!detail.empty()) std::cerr << ": " << detail;
  std::cerr << '\n';
  throw Failure{status};
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "ctsdr: cannot read " << path << '\n';
    throw Failure{CTSDR_IO};
  }
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
  if (!out) {
    std::cerr << "ctsdr: cannot write " << path << '\n';
    throw Failure{CTSDR_IO};
  }
}

// --config, then $CTSDR_CONFIG, then the built-in prototype.
void load_config(const std::string& path, ConfigHandle& cfg) {
  std::string chosen = path;
  if (chosen.empty()) {
    if (const char* env = std::getenv("CTSDR_CONFIG"); env != nullptr && *env != '\0') chosen = env;
  }
  if (chosen.empty()) {
    check(ctsdr_config_default(&cfg.p), "default config");
  } else {
    check(ctsdr_config_load(chosen.c_str(), &cfg.p), "loading config");
  }
}

struct RunArgs {
  std::string scenario;
  std::string script;
  std::string config;
  std::string out = "out";
  double dt = 0.01;
  double voxel = 0.2;
  std::optional<double> runout;
  std::optional<double> stiffness_ratio;
  bool no_snapshot = false;
};

int cmd_run(const RunArgs& a) {
  ConfigHandle cfg;
  load_config(a.config, cfg);
  if (a.runout) check(ctsdr_config_set_runout(cfg.p, *a.runout), "setting runout");
  if (a.stiffness_ratio) check(ctsdr_config_set_stiffness_ratio(cfg.p, *a.stiffness_ratio), "setting stiffness ratio");

  RunHandle run;
  ctsdr_status status;
  if (!a.script.empty()) {
    const std::string text = read_text(a.script);
    status = ctsdr_run_script(cfg.p, text.c_str(), a.dt, a.voxel, &run.p);
  } else {
    status = ctsdr_run_scenario(cfg.p, a.scenario.c_str(), a.dt, a.voxel, &run.p);
  }
  const std::string fault_detail = ctsdr_last_error();
  if (run.p == nullptr) check(status, "run");

  check(ctsdr_run_write_outputs(run.p, a.out.c_str(), a.no_snapshot ? 0 : 1), "writing outputs");
  OwnedString summary, table;
  check(ctsdr_run_summary_json(run.p, &summary.s), "summary");
  check(ctsdr_run_metrics(run.p, nullptr, nullptr, &table.s), "metrics");
  const Json s = Json::parse(summary.str());
  std::cout << "scenario " << s["scenario"].get<std::string>() << ": " << s["steps"] << " steps";
  if (!s["insertion_time"].is_null()) {
    std::cout << ", insertion time " << std::fixed << std::setprecision(2) << s["insertion_time"].get<double>()
              << " s";
  }
  std::cout << '\n';
  if (s["flagged"].get<bool>()) std::cout << "flagged: tip jump exceeded the channel clearance\n";
  std::cout << table.str() << "outputs written to " << a.out << '\n';
  if (status != CTSDR_OK) {
    std::cerr << "ctsdr: run faulted: " << fault_detail << '\n';
    return status;
  }
  return 0;
}

struct AnalyzeArgs {
  std::vector<std::string> run_dirs;
  std::string config;
  std::string ideal_file;
  std::optional<double> first_length, second_length, first_radius, second_radius;
  std::string out;
};

int cmd_analyze(const AnalyzeArgs& a) {
  ConfigHandle cfg;
  load_config(a.config, cfg);
  std::optional<std::string> ideal;
  if (!a.ideal_file.empty()) ideal = read_text(a.ideal_file);
  if (a.first_length || a.second_length || a.first_radius || a.second_radius) {
    Json j = ideal ? Json::parse(*ideal) : Json{{"first_length", 40.7}, {"second_length", 50.0}, {"second_radius", 50.0}};
    if (a.first_length) j["first_length"] = *a.first_length;
    if (a.second_length) j["second_length"] = *a.second_length;
    if (a.first_radius) j["first_radius"] = *a.first_radius;
    if (a.second_radius) j["second_radius"] = *a.second_radius;
    ideal = j.dump();
  }
  std::vector<const char*> dirs;
  for (const auto& d : a.run_dirs) dirs.push_back(d.c_str());
  OwnedString report, table;
  check(ctsdr_analyze(cfg.p, dirs.data(), dirs.size(), ideal ? ideal->c_str() : nullptr, &report.s, &table.s),
        "analyze");
  std::cout << table.str();
  if (!a.out.empty()) write_text(a.out, report.str());
  return 0;
}

struct PlanArgs {
  std::string request;
  std::string config;
  std::string out;
  std::string script_out;
};

int cmd_plan(const PlanArgs& a) {
  ConfigHandle cfg;
  load_config(a.config, cfg);
  const std::string request = read_text(a.request);
  OwnedString result, script;
  const ctsdr_status status = ctsdr_plan(cfg.p, request.c_str(), &result.s, &script.s);
  if (status == CTSDR_UNREACHABLE && result.s != nullptr && !a.out.empty()) write_text(a.out, result.str());
  check(status, "plan");
  const Json r = Json::parse(result.str());
  const Json& q = r["joints"];
  std::cout << std::fixed << std::setprecision(3) << "outer " << q["outer_translation"].get<double>()
            << " mm, inner " << q["inner_translation"].get<double>() << " mm, outer roll "
            << q["outer_roll"].get<double>() << " deg, inner roll " << q["inner_roll"].get<double>() << " deg\n"
            << "tip error " << r["tip_error"].get<double>() << " mm, length error " << r["length_error"].get<double>()
            << " mm\n";
  if (!a.out.empty()) write_text(a.out, result.str());
  if (!a.script_out.empty()) write_text(a.script_out, script.str());
  return 0;
}

int cmd_calibrate_stiffness(double observed, double pre) {
  double rho = 0.0;
  check(ctsdr_calibrate_stiffness_ratio(observed, pre, &rho), "calibrate stiffness");
  std::cout << std::fixed << std::setprecision(4) << "rho = " << rho << '\n';
  return 0;
}

int cmd_calibrate_runout(double observed, double bit) {
  double runout = 0.0;
  check(ctsdr_calibrate_runout(observed, bit, &runout), "calibrate runout");
  std::cout << std::fixed << std::setprecision(4) << "runout = " << runout << " mm\n";
  return 0;
}

int cmd_serve(const std::string& config, const std::string& host, int port) {
  ConfigHandle cfg;
  load_config(config, cfg);
  ServerHandle server;
  check(ctsdr_server_start(cfg.p, host.c_str(), port, &server.p), "serve");
  int bound = 0;
  check(ctsdr_server_port(server.p, &bound), "serve");
  std::cout << "listening on " << host << ':' << bound << std::endl;
  check(ctsdr_server_wait(server.p), "serve");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concentric-tube steerable drilling simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ctsdr_version()));

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Execute a scenario and write its outputs");
  auto* scenario_opt = run->add_option("--scenario", run_args.scenario, "Builtin scenario (S1, S2, OOP90)");
  auto* script_opt = run->add_option("--script", run_args.script, "Scenario script JSON file");
  scenario_opt->excludes(script_opt);
  run->add_option("--config", run_args.config, "Robot config JSON (default: $CTSDR_CONFIG or built-in)");
  run->add_option("--out", run_args.out, "Output directory")->capture_default_str();
  run->add_option("--dt", run_args.dt, "Time step in s")->capture_default_str()->check(CLI::PositiveNumber);
  run->add_option("--voxel", run_args.voxel, "Voxel size in mm")->capture_default_str()->check(CLI::PositiveNumber);
  run->add_option("--runout", run_args.runout, "Override bit runout in mm")->check(CLI::NonNegativeNumber);
  run->add_option("--stiffness-ratio", run_args.stiffness_ratio, "Effective outer/inner stiffness ratio")
      ->check(CLI::PositiveNumber);
  run->add_flag("--no-snapshot", run_args.no_snapshot, "Skip the carved phantom bitset (analyze then reports no diameter)");

  AnalyzeArgs analyze_args;
  auto* analyze = app.add_subcommand("analyze", "Measure one or more run directories");
  analyze->add_option("--run-dir", analyze_args.run_dirs, "Run output directory (repeatable)")->required();
  analyze->add_option("--config", analyze_args.config, "Robot config JSON");
  analyze->add_option("--ideal", analyze_args.ideal_file, "Ideal parameters JSON");
  analyze->add_option("--ideal-first-length", analyze_args.first_length, "Ideal overlap arc length, mm");
  analyze->add_option("--ideal-second-length", analyze_args.second_length, "Ideal inner-only arc length, mm");
  analyze->add_option("--ideal-first-radius", analyze_args.first_radius, "Ideal overlap radius, mm");
  analyze->add_option("--ideal-second-radius", analyze_args.second_radius, "Ideal inner-only radius, mm");
  analyze->add_option("--out", analyze_args.out, "Write the report JSON here");

  PlanArgs plan_args;
  auto* plan = app.add_subcommand("plan", "Find joint values reaching a target tip position");
  plan->add_option("--request", plan_args.request, "Plan request JSON")->required();
  plan->add_option("--config", plan_args.config, "Robot config JSON");
  plan->add_option("--out", plan_args.out, "Write the plan result JSON here");
  plan->add_option("--script-out", plan_args.script_out, "Write the winning scenario script here");

  auto* calibrate = app.add_subcommand("calibrate", "Calibrate model parameters from measurements");
  calibrate->require_subcommand(1);
  double observed_radius = 0.0, precurvature_radius = 50.0;
  auto* stiffness = calibrate->add_subcommand("stiffness", "Effective stiffness ratio from a combined radius");
  stiffness->add_option("--observed-radius", observed_radius, "Measured overlap radius, mm")->required();
  stiffness->add_option("--precurvature-radius", precurvature_radius, "Tube pre-curvature radius, mm")
      ->capture_default_str();
  double observed_diameter = 0.0, bit_diameter = 6.0;
  auto* runout = calibrate->add_subcommand("runout", "Bit runout from a measured tunnel diameter");
  runout->add_option("--observed-diameter", observed_diameter, "Measured tunnel diameter, mm")->required();
  runout->add_option("--bit-diameter", bit_diameter, "Nominal bit diameter, mm")->capture_default_str();

  std::string serve_config, host = "127.0.0.1";
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "Run the teleoperation WebSocket service");
  serve->add_option("--config", serve_config, "Robot config JSON");
  serve->add_option("--host", host, "Bind address")->capture_default_str();
  serve->add_option("--port", port, "TCP port (0 picks one)")->capture_default_str()->check(CLI::Range(0, 65535));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageExit;
  }

  try {
    if (*run) {
      if (run_args.scenario.empty() && run_args.script.empty()) {
        std::cerr << "ctsdr: run needs --scenario or --script\n";
        return kUsageExit;
      }
      return cmd_run(run_args);
    }
    if (*analyze) return cmd_analyze(analyze_args);
    if (*plan) return cmd_plan(plan_args);
    if (*stiffness) return cmd_calibrate_stiffness(observed_radius, precurvature_radius);
    if (*runout) return cmd_calibrate_runout(observed_diameter, bit_diameter);
    if (*serve) return cmd_serve(serve_config, host, port);
  } catch (const Failure& f) {
    return static_cast<int>(f.status);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "ctsdr: malformed JSON: " << e.what() << '\n';
    return CTSDR_MALFORMED_CONFIG;
  }
  return kUsageExit;
}
