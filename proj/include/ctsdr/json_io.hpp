// Copyright 2026 The ctsdr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ctsdr/analysis.hpp"
#include "ctsdr/drill_sim.hpp"
#include "ctsdr/model.hpp"
#include "ctsdr/planner.hpp"

#include "json.hpp"

#include <filesystem>
#include <span>

namespace ctsdr {

using Json = nlohmann::json;

// Readers start from defaults, override the keys present and reject unknown
// keys or wrong types with MalformedConfig.

Json to_json(const RobotConfig& config);
RobotConfig config_from_json(const Json& j);
RobotConfig load_config(const std::filesystem::path& path);

Json to_json(const ValidationReport& report);

Json to_json(const JointState& joints);
JointState joints_from_json(const Json& j);

Json to_json(const Frame& frame);
Frame frame_from_json(const Json& j);

Json to_json(const ScenarioScript& script);
ScenarioScript script_from_json(const Json& j);

Json to_json(const RunEvent& event);
Json to_json(std::span<const RunEvent> events);

Json to_json(const ArcFit& fit);
Json to_json(const MetricsReport& report);
IdealParameters ideal_from_json(const Json& j);
Json to_json(const IdealParameters& ideal);

Json to_json(const PlanRequest& request);
PlanRequest plan_request_from_json(const Json& j);
Json to_json(const RankedCandidate& candidate);
Json to_json(const PlanResult& result);

/// Scenario name, dt, flags, timing and final state of a run.
Json run_summary(const RunRecord& record);

Json vec_to_json(const Eigen::Vector3d& v);
Eigen::Vector3d vec_from_json(const Json& j);

/// Reads a whole JSON file; Io on open failure, MalformedConfig on parse errors.
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace ctsdr
