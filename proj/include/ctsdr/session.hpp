// Copyright 2026 The ctsdr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ctsdr/drill_sim.hpp"
#include "ctsdr/json_io.hpp"
#include "ctsdr/model.hpp"
#include "ctsdr/phantom.hpp"

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ctsdr {

inline constexpr int kProtocolVersion = 1;

enum class SessionMode { Idle, Jogging, Scripted, Faulted };
const char* to_string(SessionMode mode);

struct SessionOptions {
  double tick_rate = 50.0;  // Hz
  double sim_dt = 0.01;     // s per simulator step
  double tile_rate = 2.0;   // Hz; 0 disables projection tiles
  int tile_size = 32;       // pixels
  std::vector<Axis> tile_axes{Axis::Z, Axis::Y};
  double voxel_size = kDefaultVoxelSize;
};

/// One teleoperation timeline. Not thread-safe: callers serialize access.
///
/// Inbound lines are {"v":1,"kind":...,"payload":{...}}. Every outbound
/// message carries "v", a gapless "seq", "kind" and "payload".
class Session {
 public:
  Session(std::string id, RobotConfig config, SessionOptions options = {});

  const std::string& id() const { return id_; }
  SessionMode mode() const { return mode_; }
  const SimState& state() const { return state_; }
  double spindle_target() const { return spindle_target_; }
  const RobotConfig& config() const { return config_; }
  const SessionOptions& options() const { return options_; }
  std::shared_ptr<const VoxelPhantom> phantom() const { return phantom_; }
  /// Record of the most recent scripted run, finished or not.
  const RunRecord* last_record() const;
  std::uint64_t next_seq() const { return next_seq_; }

  std::vector<Json> handle_message(const Json& message);
  /// Parses one NDJSON line; parse failures become an error event.
  std::vector<Json> handle_line(std::string_view line);
  /// Advances one tick and returns the broadcast for it.
  std::vector<Json> tick();

 private:
  Json emit(const char* kind, Json payload);
  Json event(const std::string& type, const std::string& message, Json extra = Json::object());
  Json error(const std::string& command, const std::string& message);
  Json state_message(bool full_tiles);
  Json tiles(bool full);
  void reset_world();

  std::vector<Json> on_jog(const Json& payload);
  std::vector<Json> on_set_spindle(const Json& payload);
  std::vector<Json> on_load_scenario(const Json& payload);
  std::vector<Json> on_start();
  std::vector<Json> on_stop();
  std::vector<Json> on_reset();

  void jog_step(std::vector<Json>& out);
  void script_step(std::vector<Json>& out);

  std::string id_;
  RobotConfig config_;
  SessionOptions options_;
  std::shared_ptr<VoxelPhantom> phantom_;
  SimState state_;
  SessionMode mode_ = SessionMode::Idle;
  std::array<double, 4> jog_velocity_{};
  double spindle_target_ = 0.0;
  bool limit_warned_ = false;
  std::vector<std::string> faults_;
  std::optional<ScenarioScript> loaded_;
  std::unique_ptr<ScenarioRunner> runner_;
  std::optional<RunRecord> finished_record_;
  double script_time_offset_ = 0.0;
  std::uint64_t next_seq_ = 1;
  std::uint64_t ticks_ = 0;
  std::vector<std::vector<std::uint8_t>> last_tiles_;
};

/// Compact single-line serialization used on the wire.
std::string to_wire(const Json& message);

}  // namespace ctsdr
