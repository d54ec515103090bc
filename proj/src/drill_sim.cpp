// Copyright 2026 The ctsdr Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctsdr/drill_sim.hpp"

#include "ctsdr/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace ctsdr {

namespace {

constexpr double kSnapEps = 1e-9;

std::string format_value(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

RunEvent make_event(double t, const char* type, std::string phase, std::string message,
                    std::optional<double> value = std::nullopt) {
  return RunEvent{t, type, std::move(phase), std::move(message), value};
}

bool is_in_place_roll(const Command& cmd) {
  bool rolls = cmd.velocity[2] != 0.0 || cmd.velocity[3] != 0.0;
  bool translates = cmd.velocity[0] != 0.0 || cmd.velocity[1] != 0.0;
  for (const auto& u : cmd.until) {
    if (u.dof == Dof::OuterTranslation || u.dof == Dof::InnerTranslation) translates = true;
  }
  return rolls && !translates;
}

}  // namespace

double joint_value(const JointState& q, Dof dof) {
  switch (dof) {
    case Dof::OuterTranslation: return q.outer_translation;
    case Dof::InnerTranslation: return q.inner_translation;
    case Dof::OuterRoll: return q.outer_roll;
    case Dof::InnerRoll: return q.inner_roll;
  }
  return 0.0;
}

double& joint_value(JointState& q, Dof dof) {
  switch (dof) {
    case Dof::OuterTranslation: return q.outer_translation;
    case Dof::InnerTranslation: return q.inner_translation;
    case Dof::OuterRoll: return q.outer_roll;
    case Dof::InnerRoll: break;
  }
  return q.inner_roll;
}

Dof parse_dof(std::string_view name) {
  for (std::size_t i = 0; i < kDofNames.size(); ++i) {
    if (name == kDofNames[i]) return static_cast<Dof>(i);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown joint '" + std::string(name) + "'");
}

SimState initial_state(const RobotConfig& config, const JointState& joints) {
  SimState s;
  s.joints = joints;
  s.tip = tip_frame(config, joints).origin;
  return s;
}

StepOutcome step(const RobotConfig& config, const SimState& state, const VelocityCommand& command, double dt,
                 VoxelPhantom& phantom) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "step dt must be positive");
  StepOutcome out;
  out.state = state;
  const double t_end = state.t + dt;
  out.state.t = t_end;
  if (state.faulted) return out;

  const auto& lim = config.joint_limits;
  const double translation_cap = std::min(lim.max_translation_speed, config.feed_limit);

  std::array<double, 4> v = command.velocity;
  for (std::size_t d = 0; d < 4; ++d) {
    const double cap = d < 2 ? translation_cap : lim.max_roll_speed;
    if (std::abs(v[d]) > cap) {
      const double clamped = std::copysign(cap, v[d]);
      out.events.push_back(make_event(t_end, event::kClamp, "",
                                      std::string(kDofNames[d]) + " clamped from " + format_value(v[d]) +
                                          " to " + format_value(clamped),
                                      clamped));
      v[d] = clamped;
    }
  }
  out.applied_velocity = v;

  double spindle_target = command.spindle_target;
  if (spindle_target > config.spindle_max || spindle_target < 0.0) {
    const double clamped = std::clamp(spindle_target, 0.0, config.spindle_max);
    out.events.push_back(make_event(t_end, event::kClamp, "",
                                    "spindle clamped from " + format_value(spindle_target) + " to " +
                                        format_value(clamped),
                                    clamped));
    spindle_target = clamped;
  }
  const double ramp = config.spindle_accel * dt;
  double spindle = state.joints.spindle;
  spindle = spindle < spindle_target ? std::min(spindle + ramp, spindle_target)
                                     : std::max(spindle - ramp, spindle_target);
  out.state.joints.spindle = spindle;

  JointState next = state.joints;
  next.spindle = spindle;
  for (std::size_t d = 0; d < 4; ++d) {
    if (v[d] == 0.0) continue;
    const Dof dof = static_cast<Dof>(d);
    double& x = joint_value(next, dof);
    x += v[d] * dt;
    if (const auto& stop = command.stop_at[d]) {
      if ((v[d] > 0.0 && x >= *stop - kSnapEps) || (v[d] < 0.0 && x <= *stop + kSnapEps)) x = *stop;
    }
  }

  auto halt = [&](const char* reason, std::string detail) {
    out.state.faulted = true;
    out.events.push_back(make_event(t_end, event::kFault, "", std::string(reason) + ": " + detail));
    return out;
  };

  auto outside = [](double x, double lo, double hi) { return x < lo - kSnapEps || x > hi + kSnapEps; };
  if (outside(next.outer_translation, lim.outer_translation_min, lim.outer_translation_max)) {
    return halt(fault::kJointLimit, "outer_translation " + format_value(next.outer_translation));
  }
  if (outside(next.inner_translation, lim.inner_translation_min, lim.inner_translation_max)) {
    return halt(fault::kJointLimit, "inner_translation " + format_value(next.inner_translation));
  }
  if (next.inner_translation < next.outer_translation - kSnapEps) {
    return halt(fault::kInnerBehindOuter, "inner " + format_value(next.inner_translation) + " < outer " +
                                              format_value(next.outer_translation));
  }

  const Eigen::Vector3d tip = tip_frame(config, next).origin;
  const double displacement = (tip - state.tip).norm();
  if (displacement > 0.0) {
    const double radius = config.bit.cut_radius();
    if (phantom.count_in_capsule(state.tip, tip, radius, 1) > 0) {
      if (spindle < config.bit.min_cut_rpm) {
        return halt(fault::kNoSpindle, "spindle " + format_value(spindle) + " rpm");
      }
      const double feed = displacement / dt;
      if (feed > config.feed_limit * (1.0 + 1e-9)) {
        return halt(fault::kFeedLimit, "tip feed " + format_value(feed) + " mm/s");
      }
      out.carved = phantom.carve_capsule(state.tip, tip, radius);
      out.cutting = true;
    }
  }

  out.translated = next.outer_translation != state.joints.outer_translation ||
                   next.inner_translation != state.joints.inner_translation;
  out.state.joints = next;
  out.state.tip = tip;
  return out;
}

std::optional<double> RunRecord::insertion_time() const {
  if (!contact_time || !insertion_end_time) return std::nullopt;
  return *insertion_end_time - *contact_time;
}

JointState RunRecord::final_joints() const {
  return timeline.empty() ? JointState{} : timeline.back().joints;
}

const RunEvent* RunRecord::find_event(std::string_view type) const {
  for (const auto& e : events) {
    if (e.type == type) return &e;
  }
  return nullptr;
}

void append_locus_point(Centerline& locus, const Eigen::Vector3d& p) {
  auto& s = locus.samples;
  if (s.empty()) {
    s.push_back({0.0, p, Eigen::Vector3d::UnitX()});
    return;
  }
  const Eigen::Vector3d chord = p - s.back().position;
  const double len = chord.norm();
  if (len == 0.0) return;
  const Eigen::Vector3d t = chord / len;
  if (s.size() == 1) s.front().tangent = t;
  s.push_back({s.back().s + len, p, t});
  locus.sample_step = std::max(locus.sample_step, len);
}

ScenarioRunner::ScenarioRunner(RobotConfig config, ScenarioScript script, std::shared_ptr<VoxelPhantom> phantom,
                               double dt)
    : config_(std::move(config)), script_(std::move(script)), phantom_(std::move(phantom)), dt_(dt) {
  if (!(dt_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  if (!phantom_) throw Error(ErrorCode::InvalidArgument, "scenario run needs a phantom");
  const auto report = validate_config(config_);
  if (!report.valid()) {
    throw Error(ErrorCode::MalformedConfig, "invalid config: " + report.violations.front().message);
  }
  for (const auto& cmd : script_.phases) {
    if (cmd.until.empty() && !cmd.duration && !cmd.until_spindle) {
      throw Error(ErrorCode::InvalidArgument, "phase '" + cmd.phase + "' has no end condition");
    }
  }
  state_ = initial_state(config_, script_.initial);
  record_.scenario = script_.name;
  record_.dt = dt_;
  record_.phantom = phantom_;
  record_.timeline.push_back({0.0, current_phase(), state_.joints, state_.tip});
  finished_ = script_.phases.empty();
}

std::string ScenarioRunner::current_phase() const {
  return phase_index_ < script_.phases.size() ? script_.phases[phase_index_].phase : std::string();
}

bool ScenarioRunner::phase_complete(const Command& cmd) const {
  for (const auto& u : cmd.until) {
    if (std::abs(joint_value(state_.joints, u.dof) - u.target) > kSnapEps) return false;
  }
  if (cmd.until_spindle) {
    const double target = std::clamp(cmd.spindle_target, 0.0, config_.spindle_max);
    if (std::abs(state_.joints.spindle - target) > kSnapEps) return false;
  }
  if (cmd.duration && state_.t - phase_start_time_ < *cmd.duration - kSnapEps) return false;
  return true;
}

void ScenarioRunner::begin_phase(std::vector<RunEvent>& out) {
  phase_started_ = true;
  phase_start_time_ = state_.t;
  phase_start_tip_ = state_.tip;
  phase_clamped_ = false;
  out.push_back(make_event(state_.t, event::kPhaseStart, current_phase(), "phase started"));
}

std::vector<RunEvent> ScenarioRunner::advance() {
  std::vector<RunEvent> out;
  if (finished_) return out;
  if (!phase_started_) begin_phase(out);

  const Command& cmd = script_.phases[phase_index_];
  VelocityCommand vc;
  vc.velocity = cmd.velocity;
  vc.spindle_target = cmd.spindle_target;
  for (const auto& u : cmd.until) {
    const auto d = static_cast<std::size_t>(u.dof);
    const double remaining = u.target - joint_value(state_.joints, u.dof);
    vc.velocity[d] = remaining == 0.0 ? 0.0 : std::copysign(std::abs(cmd.velocity[d]), remaining);
    vc.stop_at[d] = u.target;
  }

  const Eigen::Vector3d tip_before = state_.tip;
  const double t_before = state_.t;
  StepOutcome res = step(config_, state_, vc, dt_, *phantom_);
  state_ = res.state;
  for (auto& e : res.events) {
    e.phase = cmd.phase;
    if (e.type == event::kClamp) {
      if (phase_clamped_) continue;
      phase_clamped_ = true;
    }
    out.push_back(std::move(e));
  }
  record_.timeline.push_back({state_.t, cmd.phase, state_.joints, state_.tip});

  if (res.cutting && !record_.contact_time) {
    record_.contact_time = t_before;
    out.push_back(make_event(t_before, event::kContact, cmd.phase, "bit reached material"));
  }
  if (res.translated) {
    record_.insertion_end_time = state_.t;
    auto& locus = record_.tip_locus;
    if (locus.empty() || locus.samples.back().position != tip_before) append_locus_point(locus, tip_before);
    append_locus_point(locus, state_.tip);
  }

  if (state_.faulted) {
    record_.faulted = true;
    finished_ = true;
  } else if (phase_complete(cmd)) {
    out.push_back(make_event(state_.t, event::kPhaseEnd, cmd.phase, "phase completed"));
    if (is_in_place_roll(cmd)) {
      const double jump = (state_.tip - phase_start_tip_).norm();
      const double clearance = channel_clearance(config_);
      out.push_back(make_event(state_.t, event::kDiscontinuity, cmd.phase,
                               "tip moved " + format_value(jump) + " mm during in-place roll", jump));
      if (jump > clearance) {
        record_.flagged = true;
        out.push_back(make_event(state_.t, event::kClearanceExceeded, cmd.phase,
                                 "tip jump " + format_value(jump) + " mm exceeds channel clearance " +
                                     format_value(clearance) + " mm",
                                 jump));
      }
    }
    ++phase_index_;
    phase_started_ = false;
    finished_ = phase_index_ >= script_.phases.size();
  }
  record_.events.insert(record_.events.end(), out.begin(), out.end());
  return out;
}

RunRecord run_scenario(const ScenarioScript& script, const RobotConfig& config, std::shared_ptr<VoxelPhantom> phantom,
                       const RunOptions& options) {
  ScenarioRunner runner(config, script, std::move(phantom), options.dt);
  while (!runner.finished()) runner.advance();
  return runner.take_record();
}

namespace {

Command spin_up(double rpm) {
  Command c;
  c.phase = "spin-up";
  c.spindle_target = rpm;
  c.until_spindle = true;
  return c;
}

Command co_advance(std::string phase, double feed, double to, double rpm) {
  Command c;
  c.phase = std::move(phase);
  c.velocity = {feed, feed, 0.0, 0.0};
  c.spindle_target = rpm;
  c.until = {{Dof::OuterTranslation, to}, {Dof::InnerTranslation, to}};
  return c;
}

Command inner_advance(double feed, double to, double rpm) {
  Command c;
  c.phase = "inner-advance";
  c.velocity = {0.0, feed, 0.0, 0.0};
  c.spindle_target = rpm;
  c.until = {{Dof::InnerTranslation, to}};
  return c;
}

Command roll_inner(double speed, double to, double rpm) {
  Command c;
  c.phase = "roll-inner";
  c.velocity = {0.0, 0.0, 0.0, speed};
  c.spindle_target = rpm;
  c.until = {{Dof::InnerRoll, to}};
  return c;
}

}  // namespace

std::vector<ScenarioScript> builtin_scenarios(const RobotConfig& config) {
  const double feed = config.feed_rate;
  const double rpm = config.spindle_max;
  const double roll_speed = config.joint_limits.max_roll_speed;

  ScenarioScript s1;
  s1.name = "S1";
  s1.description = "aligned co-advance 20 mm, roll inner 180 deg in place, inner advance 50 mm";
  s1.phases = {spin_up(rpm), co_advance("co-advance", feed, 20.0, rpm), roll_inner(roll_speed, 180.0, rpm),
               inner_advance(feed, 70.0, rpm)};

  ScenarioScript s2;
  s2.name = "S2";
  s2.description = "opposed from start: pre-extend 10.8 mm, co-advance to 40.7 mm, inner advance 50 mm";
  s2.initial.inner_roll = 180.0;
  s2.phases = {spin_up(rpm), co_advance("pre-extend", feed, 10.8, rpm), co_advance("co-advance", feed, 40.7, rpm),
               inner_advance(feed, 90.7, rpm)};

  ScenarioScript oop;
  oop.name = "OOP90";
  oop.description = "aligned co-advance 20 mm, roll inner 90 deg in place, inner advance 50 mm";
  oop.phases = {spin_up(rpm), co_advance("co-advance", feed, 20.0, rpm), roll_inner(roll_speed, 90.0, rpm),
                inner_advance(feed, 70.0, rpm)};

  return {s1, s2, oop};
}

std::vector<ScenarioScript> builtin_scenarios() { return builtin_scenarios(default_robot_config()); }

ScenarioScript find_scenario(std::string_view name, const RobotConfig& config) {
  for (auto& s : builtin_scenarios(config)) {
    if (s.name == name) return s;
  }
  throw Error(ErrorCode::UnknownScenario, "unknown scenario '" + std::string(name) + "'");
}

ScenarioScript s_shape_script(std::string name, const RobotConfig& config, double outer_length,
                              double inner_length, double outer_roll, double inner_roll) {
  const double feed = config.feed_rate;
  const double rpm = config.spindle_max;
  ScenarioScript script;
  script.name = std::move(name);
  std::ostringstream desc;
  desc << "rolls " << outer_roll << "/" << inner_roll << " deg, co-advance to " << outer_length
       << " mm, inner advance to " << inner_length << " mm";
  script.description = desc.str();
  script.initial.outer_roll = outer_roll;
  script.initial.inner_roll = inner_roll;
  script.phases.push_back(spin_up(rpm));
  if (outer_length > 0.0) script.phases.push_back(co_advance("co-advance", feed, outer_length, rpm));
  if (inner_length > outer_length) script.phases.push_back(inner_advance(feed, inner_length, rpm));
  return script;
}

void write_timeline_csv(std::ostream& os, const RunRecord& record) {
  os << "t_s,phase,outer_translation_mm,inner_translation_mm,outer_roll_deg,inner_roll_deg,spindle_rpm,"
        "tip_x_mm,tip_y_mm,tip_z_mm\n";
  os << std::setprecision(10);
  for (const auto& s : record.timeline) {
    const auto& q = s.joints;
    os << s.t << ',' << s.phase << ',' << q.outer_translation << ',' << q.inner_translation << ','
       << q.outer_roll << ',' << q.inner_roll << ',' << q.spindle << ',' << s.tip.x() << ',' << s.tip.y() << ','
       << s.tip.z() << '\n';
  }
}

}  // namespace ctsdr
