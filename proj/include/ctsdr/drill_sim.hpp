// Copyright 2026 The ctsdr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ctsdr/kinematics.hpp"
#include "ctsdr/model.hpp"
#include "ctsdr/phantom.hpp"

#include <Eigen/Dense>

#include <array>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ctsdr {

enum class Dof { OuterTranslation = 0, InnerTranslation = 1, OuterRoll = 2, InnerRoll = 3 };

inline constexpr std::array<const char*, 4> kDofNames{"outer_translation", "inner_translation", "outer_roll",
                                                       "inner_roll"};

double joint_value(const JointState& q, Dof dof);
double& joint_value(JointState& q, Dof dof);
Dof parse_dof(std::string_view name);

/// Drive `dof` toward `target` at the command's speed for that DoF; the
/// phase ends once every target is reached.
struct Until {
  Dof dof = Dof::InnerTranslation;
  double target = 0.0;
};

struct Command {
  std::string phase;
  std::array<double, 4> velocity{};  // mm/s, mm/s, deg/s, deg/s
  double spindle_target = 0.0;       // rpm
  std::optional<double> duration;    // s
  std::vector<Until> until;
  bool until_spindle = false;        // also wait for the spindle to reach its target
};

struct ScenarioScript {
  std::string name;
  std::string description;
  JointState initial;
  std::vector<Command> phases;
};

/// Per-step actuation request. `stop_at` pins a DoF exactly on a target
/// instead of overshooting it.
struct VelocityCommand {
  std::array<double, 4> velocity{};
  double spindle_target = 0.0;
  std::array<std::optional<double>, 4> stop_at{};
};

struct SimState {
  double t = 0.0;
  JointState joints;
  Eigen::Vector3d tip = Eigen::Vector3d::Zero();
  bool faulted = false;
};

namespace event {
inline constexpr const char* kPhaseStart = "phase-start";
inline constexpr const char* kPhaseEnd = "phase-end";
inline constexpr const char* kClamp = "clamp";
inline constexpr const char* kFault = "fault";
inline constexpr const char* kContact = "contact";
inline constexpr const char* kDiscontinuity = "tip-discontinuity";
inline constexpr const char* kClearanceExceeded = "clearance-exceeded";
}  // namespace event

namespace fault {
inline constexpr const char* kNoSpindle = "advance without spindle";
inline constexpr const char* kFeedLimit = "feed limit exceeded";
inline constexpr const char* kJointLimit = "joint limit reached";
inline constexpr const char* kInnerBehindOuter = "inner tip behind outer tip";
}  // namespace fault

struct RunEvent {
  double t = 0.0;
  std::string type;
  std::string phase;
  std::string message;
  std::optional<double> value;
};

struct StepOutcome {
  SimState state;
  std::vector<RunEvent> events;
  std::size_t carved = 0;
  bool cutting = false;
  bool translated = false;
  std::array<double, 4> applied_velocity{};
};

/// Start state for `joints`: tip placed by forward kinematics.
SimState initial_state(const RobotConfig& config, const JointState& joints);

/// One fixed-step update: clamp velocities, ramp the spindle, integrate,
/// then enforce the cutting rules against `phantom` and carve the swept
/// bit. A fault leaves the joints where they were.
StepOutcome step(const RobotConfig& config, const SimState& state, const VelocityCommand& command, double dt,
                 VoxelPhantom& phantom);

struct TimelineSample {
  double t = 0.0;
  std::string phase;
  JointState joints;
  Eigen::Vector3d tip = Eigen::Vector3d::Zero();
};

struct RunRecord {
  std::string scenario;
  double dt = 0.0;
  std::vector<TimelineSample> timeline;
  std::vector<RunEvent> events;
  /// Tip positions over translating steps; the drilled channel axis.
  Centerline tip_locus;
  std::shared_ptr<VoxelPhantom> phantom;
  bool faulted = false;
  bool flagged = false;
  std::optional<double> contact_time;
  std::optional<double> insertion_end_time;

  /// From the first cutting step to the end of the last translating step.
  std::optional<double> insertion_time() const;
  JointState final_joints() const;
  const RunEvent* find_event(std::string_view type) const;
};

struct RunOptions {
  double dt = 0.01;
};

/// Incremental scenario executor shared by batch runs and live sessions.
class ScenarioRunner {
 public:
  ScenarioRunner(RobotConfig config, ScenarioScript script, std::shared_ptr<VoxelPhantom> phantom,
                 double dt = RunOptions{}.dt);

  bool finished() const { return finished_; }
  bool faulted() const { return record_.faulted; }
  const SimState& state() const { return state_; }
  const RunRecord& record() const { return record_; }
  RunRecord take_record() { return std::move(record_); }
  std::string current_phase() const;

  /// Runs one step and returns the events it produced.
  std::vector<RunEvent> advance();

 private:
  void begin_phase(std::vector<RunEvent>& out);
  bool phase_complete(const Command& cmd) const;

  RobotConfig config_;
  ScenarioScript script_;
  std::shared_ptr<VoxelPhantom> phantom_;
  double dt_;
  SimState state_;
  RunRecord record_;
  std::size_t phase_index_ = 0;
  bool phase_started_ = false;
  double phase_start_time_ = 0.0;
  Eigen::Vector3d phase_start_tip_ = Eigen::Vector3d::Zero();
  bool phase_clamped_ = false;
  bool finished_ = false;
};

/// Runs to completion. A fault stops the run early with `faulted` set and
/// the partial record kept.
RunRecord run_scenario(const ScenarioScript& script, const RobotConfig& config,
                       std::shared_ptr<VoxelPhantom> phantom, const RunOptions& options = {});

/// "S1", "S2" and "OOP90" with speeds from `config`.
std::vector<ScenarioScript> builtin_scenarios(const RobotConfig& config);
std::vector<ScenarioScript> builtin_scenarios();
ScenarioScript find_scenario(std::string_view name, const RobotConfig& config);

/// Rolls preset, spin-up, co-advance to `outer_length`, then inner advance to
/// `inner_length`.
ScenarioScript s_shape_script(std::string name, const RobotConfig& config, double outer_length,
                              double inner_length, double outer_roll, double inner_roll);

/// Locus polyline helper: appends `p` with chord-length parameterisation.
void append_locus_point(Centerline& locus, const Eigen::Vector3d& p);

/// t_s, phase, joints, spindle, tip.
void write_timeline_csv(std::ostream& os, const RunRecord& record);

}  // namespace ctsdr
