// Copyright 2026 The ctsdr Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctsdr/session.hpp"

#include "ctsdr/analysis.hpp"
#include "ctsdr/error.hpp"

#include <algorithm>
#include <cmath>

namespace ctsdr {

namespace {

constexpr const char* kJogKeys[4] = {"outer", "inner", "outer_roll", "inner_roll"};

const Json* payload_field(const Json& payload, const char* key) {
  if (!payload.is_object()) return nullptr;
  auto it = payload.find(key);
  return it == payload.end() ? nullptr : &*it;
}

}  // namespace

const char* to_string(SessionMode mode) {
  switch (mode) {
    case SessionMode::Idle: return "idle";
    case SessionMode::Jogging: return "jogging";
    case SessionMode::Scripted: return "scripted";
    case SessionMode::Faulted: return "faulted";
  }
  return "?";
}

std::string to_wire(const Json& message) { return message.dump(); }

Session::Session(std::string id, RobotConfig config, SessionOptions options)
    : id_(std::move(id)), config_(std::move(config)), options_(std::move(options)) {
  const auto report = validate_config(config_);
  if (!report.valid()) throw Error(ErrorCode::MalformedConfig, "invalid config: " + report.violations.front().message);
  if (!(options_.tick_rate > 0.0) || !(options_.sim_dt > 0.0) || options_.tile_rate < 0.0 || options_.tile_size <= 0) {
    throw Error(ErrorCode::InvalidArgument, "invalid session options");
  }
  reset_world();
}

const RunRecord* Session::last_record() const {
  if (runner_) return &runner_->record();
  return finished_record_ ? &*finished_record_ : nullptr;
}

void Session::reset_world() {
  phantom_ = std::make_shared<VoxelPhantom>(default_scenario_phantom(config_.sheath.pose, options_.voxel_size));
  state_ = initial_state(config_, JointState{});
  mode_ = SessionMode::Idle;
  jog_velocity_ = {};
  spindle_target_ = 0.0;
  limit_warned_ = false;
  faults_.clear();
  runner_.reset();
  last_tiles_.clear();
}

Json Session::emit(const char* kind, Json payload) {
  return Json{{"v", kProtocolVersion}, {"seq", next_seq_++}, {"kind", kind}, {"payload", std::move(payload)}};
}

Json Session::event(const std::string& type, const std::string& message, Json extra) {
  Json payload{{"t", state_.t}, {"type", type}, {"message", message}};
  for (auto& [k, v] : extra.items()) payload[k] = v;
  return emit("event", std::move(payload));
}

Json Session::error(const std::string& command, const std::string& message) {
  return event("error", message, Json{{"command", command}});
}

Json Session::state_message(bool full_tiles) {
  Json faults = Json::array();
  for (const auto& f : faults_) faults.push_back(f);
  Json payload{{"t", state_.t},
               {"mode", to_string(mode_)},
               {"joints", to_json(state_.joints)},
               {"tip", vec_to_json(state_.tip)},
               {"spindle", state_.joints.spindle},
               {"faults", faults}};
  if (runner_) payload["phase"] = runner_->current_phase();
  const bool tile_tick = options_.tile_rate > 0.0 &&
                         ticks_ % static_cast<std::uint64_t>(std::max(1.0, std::round(options_.tick_rate / options_.tile_rate))) == 0;
  if (full_tiles || tile_tick) {
    Json t = tiles(full_tiles);
    if (!t.empty()) payload["tiles"] = std::move(t);
  }
  return emit("state", std::move(payload));
}

Json Session::tiles(bool full) {
  Json out = Json::array();
  const int ts = options_.tile_size;
  if (last_tiles_.empty()) full = true;
  std::vector<std::vector<std::uint8_t>> current;
  for (Axis axis : options_.tile_axes) {
    const GrayImage img = project(*phantom_, axis);
    std::vector<std::uint8_t> flat = img.pixels;
    const std::size_t slot = current.size();
    const std::vector<std::uint8_t>* previous = slot < last_tiles_.size() ? &last_tiles_[slot] : nullptr;
    for (int row = 0; row * ts < img.height; ++row) {
      for (int col = 0; col * ts < img.width; ++col) {
        const int w = std::min(ts, img.width - col * ts);
        const int h = std::min(ts, img.height - row * ts);
        bool changed = full || previous == nullptr || previous->size() != flat.size();
        std::vector<int> pixels;
        pixels.reserve(static_cast<std::size_t>(w) * h);
        for (int y = 0; y < h; ++y) {
          for (int x = 0; x < w; ++x) {
            const std::size_t idx = static_cast<std::size_t>(row * ts + y) * img.width + (col * ts + x);
            pixels.push_back(flat[idx]);
            if (!changed && (*previous)[idx] != flat[idx]) changed = true;
          }
        }
        if (!changed) continue;
        out.push_back({{"axis", to_string(axis)},
                       {"col", col},
                       {"row", row},
                       {"width", w},
                       {"height", h},
                       {"image_width", img.width},
                       {"image_height", img.height},
                       {"pixels", pixels}});
      }
    }
    current.push_back(std::move(flat));
  }
  last_tiles_ = std::move(current);
  return out;
}

std::vector<Json> Session::handle_line(std::string_view line) {
  Json msg;
  try {
    msg = Json::parse(line);
  } catch (const Json::parse_error&) {
    return {error("", "malformed message: not valid JSON")};
  }
  return handle_message(msg);
}

std::vector<Json> Session::handle_message(const Json& message) {
  if (!message.is_object()) return {error("", "malformed message: expected an object")};
  const auto v = message.find("v");
  if (v == message.end() || !v->is_number_integer() || v->get<int>() != kProtocolVersion) {
    return {error("", "unsupported protocol version")};
  }
  const auto k = message.find("kind");
  if (k == message.end() || !k->is_string()) return {error("", "malformed message: missing kind")};
  const std::string kind = k->get<std::string>();
  Json payload = Json::object();
  if (auto p = message.find("payload"); p != message.end() && !p->is_null()) payload = *p;
  if (!payload.is_object()) return {error(kind, "malformed payload: expected an object")};

  if (mode_ == SessionMode::Faulted && kind != "reset") {
    return {error(kind, "session is faulted; only reset is accepted")};
  }
  if (kind == "jog") return on_jog(payload);
  if (kind == "set_spindle") return on_set_spindle(payload);
  if (kind == "load_scenario") return on_load_scenario(payload);
  if (kind == "start") return on_start();
  if (kind == "stop") return on_stop();
  if (kind == "reset") return on_reset();
  if (kind == "state") {
    const Json* t = payload_field(payload, "tiles");
    const bool full = t != nullptr && t->is_string() && t->get<std::string>() == "full";
    return {state_message(full)};
  }
  return {error(kind, "unknown message kind '" + kind + "'")};
}

std::vector<Json> Session::on_jog(const Json& payload) {
  if (mode_ == SessionMode::Scripted) return {error("jog", "a scenario is running; stop it first")};
  std::array<double, 4> v{};
  for (const auto& [key, value] : payload.items()) {
    std::size_t d = 4;
    for (std::size_t i = 0; i < 4; ++i) {
      if (key == kJogKeys[i]) d = i;
    }
    if (d == 4) return {error("jog", "malformed payload: unknown axis '" + key + "'")};
    if (!value.is_number() || !std::isfinite(value.get<double>())) {
      return {error("jog", "malformed payload: " + key + " must be a number")};
    }
    v[d] = value.get<double>();
  }
  std::vector<Json> out;
  const double translation_cap = std::min(config_.joint_limits.max_translation_speed, config_.feed_limit);
  for (std::size_t d = 0; d < 4; ++d) {
    const double cap = d < 2 ? translation_cap : config_.joint_limits.max_roll_speed;
    if (std::abs(v[d]) > cap) {
      const double clamped = std::copysign(cap, v[d]);
      out.push_back(event("warning", std::string(kJogKeys[d]) + " jog clamped to limit",
                          Json{{"axis", kJogKeys[d]}, {"requested", v[d]}, {"applied", clamped}}));
      v[d] = clamped;
    }
  }
  jog_velocity_ = v;
  limit_warned_ = false;
  mode_ = SessionMode::Jogging;
  Json applied{{"outer", v[0]}, {"inner", v[1]}, {"outer_roll", v[2]}, {"inner_roll", v[3]}};
  out.push_back(event("jog", "jog velocities set", Json{{"velocity", applied}}));
  return out;
}

std::vector<Json> Session::on_set_spindle(const Json& payload) {
  if (mode_ == SessionMode::Scripted) return {error("set_spindle", "a scenario is running; stop it first")};
  const Json* rpm = payload_field(payload, "rpm");
  if (rpm == nullptr || !rpm->is_number() || !std::isfinite(rpm->get<double>())) {
    return {error("set_spindle", "malformed payload: rpm must be a number")};
  }
  std::vector<Json> out;
  double target = rpm->get<double>();
  if (target < 0.0 || target > config_.spindle_max) {
    const double clamped = std::clamp(target, 0.0, config_.spindle_max);
    out.push_back(event("warning", "spindle target clamped to limit",
                        Json{{"axis", "spindle"}, {"requested", target}, {"applied", clamped}}));
    target = clamped;
  }
  spindle_target_ = target;
  mode_ = SessionMode::Jogging;
  out.push_back(event("spindle", "spindle target set", Json{{"rpm", target}}));
  return out;
}

std::vector<Json> Session::on_load_scenario(const Json& payload) {
  if (mode_ == SessionMode::Scripted) return {error("load_scenario", "a scenario is running; stop it first")};
  try {
    if (const Json* name = payload_field(payload, "name"); name != nullptr && name->is_string()) {
      loaded_ = find_scenario(name->get<std::string>(), config_);
    } else if (const Json* script = payload_field(payload, "script"); script != nullptr) {
      loaded_ = script_from_json(*script);
    } else {
      return {error("load_scenario", "malformed payload: needs a scenario name or script")};
    }
  } catch (const Error& e) {
    return {error("load_scenario", e.what())};
  }
  return {event("scenario-loaded", "scenario loaded", Json{{"scenario", loaded_->name}})};
}

std::vector<Json> Session::on_start() {
  if (mode_ == SessionMode::Scripted) return {error("start", "a scenario is already running")};
  if (!loaded_) return {error("start", "no scenario loaded")};
  try {
    runner_ = std::make_unique<ScenarioRunner>(config_, *loaded_, phantom_, options_.sim_dt);
  } catch (const Error& e) {
    return {error("start", e.what())};
  }
  finished_record_.reset();
  jog_velocity_ = {};
  script_time_offset_ = state_.t;
  state_ = runner_->state();
  state_.t += script_time_offset_;
  mode_ = SessionMode::Scripted;
  return {event("scenario-started", "scenario started", Json{{"scenario", loaded_->name}})};
}

std::vector<Json> Session::on_stop() {
  std::vector<Json> out;
  jog_velocity_ = {};
  if (mode_ == SessionMode::Scripted) {
    finished_record_ = runner_->take_record();
    runner_.reset();
    out.push_back(event("scenario-stopped", "scenario aborted by stop"));
  }
  mode_ = spindle_target_ > 0.0 ? SessionMode::Jogging : SessionMode::Idle;
  out.push_back(event("stop", "velocities zeroed"));
  return out;
}

std::vector<Json> Session::on_reset() {
  reset_world();
  finished_record_.reset();
  return {event("reset", "phantom and joints restored")};
}

void Session::jog_step(std::vector<Json>& out) {
  const auto& lim = config_.joint_limits;
  const double dt = options_.sim_dt;
  VelocityCommand vc;
  vc.velocity = jog_velocity_;
  vc.spindle_target = spindle_target_;
  // Translations stop on their bounds, and the outer tip never passes the inner one.
  const JointState& q = state_.joints;
  const double inner_next = q.inner_translation + jog_velocity_[1] * dt;
  if (jog_velocity_[1] > 0.0) vc.stop_at[1] = lim.inner_translation_max;
  if (jog_velocity_[1] < 0.0) vc.stop_at[1] = std::max(lim.inner_translation_min, q.outer_translation);
  if (jog_velocity_[0] > 0.0) vc.stop_at[0] = std::min(lim.outer_translation_max, std::max(inner_next, q.outer_translation));
  if (jog_velocity_[0] < 0.0) vc.stop_at[0] = lim.outer_translation_min;
  if (jog_velocity_[1] < 0.0 && jog_velocity_[0] < 0.0) {
    vc.stop_at[1] = std::max(lim.inner_translation_min, q.outer_translation + jog_velocity_[0] * dt);
  }
  for (std::size_t d = 0; d < 2; ++d) {
    if (!vc.stop_at[d]) continue;
    const double x = d == 0 ? q.outer_translation : q.inner_translation;
    const bool blocked = (vc.velocity[d] > 0.0 && x >= *vc.stop_at[d]) || (vc.velocity[d] < 0.0 && x <= *vc.stop_at[d]);
    if (blocked) {
      vc.velocity[d] = 0.0;
      if (!limit_warned_) {
        limit_warned_ = true;
        out.push_back(event("warning", std::string(kJogKeys[d]) + " jog held at its travel limit",
                            Json{{"axis", kJogKeys[d]}}));
      }
    }
  }
  StepOutcome res = step(config_, state_, vc, dt, *phantom_);
  state_ = res.state;
  for (const auto& e : res.events) {
    if (e.type == event::kFault) {
      faults_.push_back(e.message);
      out.push_back(event("fault", e.message));
    }
  }
  if (state_.faulted) {
    mode_ = SessionMode::Faulted;
    jog_velocity_ = {};
  }
}

void Session::script_step(std::vector<Json>& out) {
  for (const auto& e : runner_->advance()) {
    Json extra{{"phase", e.phase}};
    if (e.value) extra["value"] = *e.value;
    Json msg = event(e.type, e.message, std::move(extra));
    msg["payload"]["t"] = e.t + script_time_offset_;
    out.push_back(std::move(msg));
    if (e.type == event::kFault) faults_.push_back(e.message);
  }
  state_ = runner_->state();
  state_.t += script_time_offset_;
  if (!runner_->finished()) return;

  RunRecord record = runner_->take_record();
  runner_.reset();
  if (record.faulted) {
    mode_ = SessionMode::Faulted;
  } else {
    mode_ = SessionMode::Idle;
    spindle_target_ = state_.joints.spindle;
    if (spindle_target_ > 0.0) mode_ = SessionMode::Jogging;
    out.push_back(event("scenario-complete", "scenario finished", Json{{"scenario", record.scenario}}));
    Json metrics{{"scenario", record.scenario}, {"run", run_summary(record)}};
    try {
      const RunRecord one[1] = {record};
      const MetricsReport report =
          metrics_report(std::span<const RunRecord>(one, 1), ideal_from_joints(config_, record.final_joints()));
      metrics["report"] = to_json(report);
    } catch (const Error& e) {
      metrics["report"] = nullptr;
      metrics["note"] = e.what();
    }
    out.push_back(emit("metrics", std::move(metrics)));
  }
  finished_record_ = std::move(record);
}

std::vector<Json> Session::tick() {
  std::vector<Json> out;
  const int steps = std::max(1, static_cast<int>(std::lround(1.0 / (options_.tick_rate * options_.sim_dt))));
  for (int i = 0; i < steps; ++i) {
    if (mode_ == SessionMode::Faulted) break;
    if (mode_ == SessionMode::Scripted) {
      script_step(out);
    } else {
      jog_step(out);
    }
  }
  ++ticks_;
  out.push_back(state_message(false));
  return out;
}

}  // namespace ctsdr
