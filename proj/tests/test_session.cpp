// Copyright 2026 The ctsdr Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctsdr/session.hpp"

#include "doctest.h"
#include "support.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ctsdr;

namespace {

const std::filesystem::path kGolden = std::filesystem::path(CTSDR_TEST_DATA_DIR) / "golden";

SessionOptions fast_options() {
  SessionOptions o;
  o.voxel_size = 1.0;
  o.tile_rate = 0.0;
  return o;
}

Json msg(const std::string& kind, Json payload = Json::object()) {
  return Json{{"v", kProtocolVersion}, {"kind", kind}, {"payload", std::move(payload)}};
}

// Collects everything a session sends so sequence numbers can be audited.
struct Wire {
  Session& session;
  std::vector<Json> sent;

  std::vector<Json> send(const Json& m) { return keep(session.handle_message(m)); }
  std::vector<Json> tick(int n = 1) {
    std::vector<Json> all;
    for (int i = 0; i < n; ++i) {
      auto out = keep(session.tick());
      all.insert(all.end(), out.begin(), out.end());
    }
    return all;
  }
  std::vector<Json> keep(std::vector<Json> out) {
    sent.insert(sent.end(), out.begin(), out.end());
    return out;
  }
};

bool has_event(const std::vector<Json>& out, const std::string& type) {
  for (const auto& m : out)
    if (m["kind"] == "event" && m["payload"]["type"] == type) return true;
  return false;
}

void spin_up(Wire& w) {
  w.send(msg("set_spindle", {{"rpm", 1000.0}}));
  w.tick(75);
}

}  // namespace

TEST_CASE("jogging the inner tube at feed rate for one second") {
  Session s("jog", default_robot_config(), fast_options());
  Wire w{s};
  spin_up(w);
  const double start = s.state().joints.inner_translation;
  const auto reply = w.send(msg("jog", {{"inner", 1.65}}));
  CHECK(has_event(reply, "jog"));
  CHECK(s.mode() == SessionMode::Jogging);
  w.tick(50);
  const double moved = s.state().joints.inner_translation - start;
  CHECK(std::abs(moved - 1.65) <= 1.65 * 0.02 + 1e-9);
  CHECK(s.state().t == doctest::Approx(2.5));
}

TEST_CASE("over-limit jog is clamped with a warning") {
  Session s("clamp", default_robot_config(), fast_options());
  Wire w{s};
  const auto reply = w.send(msg("jog", {{"outer_roll", 1e4}}));
  REQUIRE(has_event(reply, "warning"));
  CHECK(reply.front()["payload"]["applied"] == s.config().joint_limits.max_roll_speed);
  w.tick(5);
  CHECK(s.state().joints.outer_roll == doctest::Approx(s.config().joint_limits.max_roll_speed * 0.1));
}

TEST_CASE("retracting at the travel limit holds with one warning") {
  Session s("limit", default_robot_config(), fast_options());
  Wire w{s};
  w.send(msg("jog", {{"inner", -1.0}}));
  const auto out = w.tick(10);
  int warnings = 0;
  for (const auto& m : out) warnings += m["kind"] == "event" && m["payload"]["type"] == "warning";
  CHECK(warnings == 1);
  CHECK(s.state().joints.inner_translation == 0.0);
  CHECK(s.mode() == SessionMode::Jogging);
}

TEST_CASE("sequence numbers are gapless across kinds") {
  Session s("seq", default_robot_config(), fast_options());
  Wire w{s};
  spin_up(w);
  w.send(msg("jog", {{"inner", 9.0}}));
  w.tick(3);
  w.send(msg("bogus"));
  w.send(msg("stop"));
  w.send(msg("state", {{"tiles", "full"}}));
  w.tick();
  std::uint64_t expect = 1;
  for (const auto& m : w.sent) {
    CHECK(m["v"] == kProtocolVersion);
    CHECK(m["seq"] == expect++);
    CHECK(m.contains("kind"));
    CHECK(m.contains("payload"));
  }
  CHECK(s.next_seq() == expect);
}

TEST_CASE("OOP90 from the session reports orthogonal planes") {
  Session s("oop", default_robot_config(), fast_options());
  Wire w{s};
  CHECK(has_event(w.send(msg("load_scenario", {{"name", "OOP90"}})), "scenario-loaded"));
  CHECK(has_event(w.send(msg("start")), "scenario-started"));
  CHECK(s.mode() == SessionMode::Scripted);
  std::vector<Json> all;
  for (int i = 0; i < 20000 && s.mode() == SessionMode::Scripted; ++i) {
    auto out = w.tick();
    all.insert(all.end(), out.begin(), out.end());
  }
  REQUIRE(s.mode() != SessionMode::Scripted);
  std::string last_phase_end;
  const Json* metrics = nullptr;
  for (const auto& m : all) {
    if (m["kind"] == "event" && m["payload"]["type"] == "phase-end") last_phase_end = m["payload"]["phase"];
    if (m["kind"] == "metrics") metrics = &m;
  }
  CHECK(last_phase_end == "inner-advance");
  REQUIRE(metrics != nullptr);
  CHECK((*metrics)["payload"]["scenario"] == "OOP90");
  const Json& angle = (*metrics)["payload"]["report"]["plane_angle_deg"]["mean"];
  REQUIRE(angle.is_number());
  CHECK(std::abs(angle.get<double>() - 90.0) < 2.0);
}

TEST_CASE("a faulted session accepts only reset") {
  Session s("fault", default_robot_config(), fast_options());
  Wire w{s};
  w.send(msg("jog", {{"inner", 1.0}}));
  const auto out = w.tick();
  CHECK(has_event(out, "fault"));
  CHECK(s.mode() == SessionMode::Faulted);
  CHECK(out.back()["payload"]["faults"].size() == 1);
  for (const char* kind : {"jog", "set_spindle", "start", "stop", "load_scenario", "state"}) {
    CAPTURE(kind);
    const auto reply = w.send(msg(kind));
    REQUIRE(reply.size() == 1);
    CHECK(reply[0]["payload"]["type"] == "error");
    CHECK(s.mode() == SessionMode::Faulted);
  }
  const JointState frozen = s.state().joints;
  w.tick(3);
  CHECK(s.state().joints == frozen);
  CHECK(has_event(w.send(msg("reset")), "reset"));
  CHECK(s.mode() == SessionMode::Idle);
  CHECK(s.state().joints == JointState{});
}

TEST_CASE("malformed messages leave the session unchanged") {
  Session s("bad", default_robot_config(), fast_options());
  Wire w{s};
  spin_up(w);
  w.send(msg("jog", {{"outer_roll", 5.0}}));
  const SimState before = s.state();
  const SessionMode mode = s.mode();
  const double spindle = s.spindle_target();
  const std::vector<Json> bad{msg("jog", {{"elbow", 1.0}}),
                              msg("jog", {{"inner", "fast"}}),
                              msg("set_spindle", {{"rpm", "max"}}),
                              msg("load_scenario", {{"name", "NOPE"}}),
                              msg("load_scenario", {{"script", {{"name", "x"}}}}),
                              msg("start"),
                              msg("teleport"),
                              Json{{"v", 2}, {"kind", "stop"}},
                              Json{{"kind", "stop"}},
                              Json{{"v", 1}, {"kind", "jog"}, {"payload", 3}},
                              Json::array()};
  for (const auto& m : bad) {
    CAPTURE(m.dump());
    const auto reply = w.send(m);
    REQUIRE(reply.size() == 1);
    CHECK(reply[0]["kind"] == "event");
    CHECK(reply[0]["payload"]["type"] == "error");
    CHECK(s.mode() == mode);
    CHECK(s.spindle_target() == spindle);
    CHECK(s.state().joints == before.joints);
  }
  const auto text = s.handle_line("{not json");
  REQUIRE(text.size() == 1);
  CHECK(text[0]["payload"]["type"] == "error");
  // Jog velocities survived: the roll keeps moving.
  w.tick();
  CHECK(s.state().joints.outer_roll > before.joints.outer_roll);
}

TEST_CASE("scripted replay matches the batch run") {
  const RobotConfig cfg = default_robot_config();
  Session s("replay", cfg, fast_options());
  Wire w{s};
  w.send(msg("load_scenario", {{"name", "S2"}}));
  w.send(msg("start"));
  int ticks = 0;
  while (s.mode() == SessionMode::Scripted && ticks < 20000) {
    w.tick();
    ++ticks;
  }
  const RunRecord batch = testing::run_on_default_phantom(find_scenario("S2", cfg), cfg, 1.0);
  REQUIRE(s.last_record() != nullptr);
  const RunRecord& live = *s.last_record();
  CHECK(testing::identical_records(live, batch));
  const double tick = 1.0 / s.options().tick_rate;
  CHECK(std::abs(s.state().t - batch.timeline.back().t) <= tick);
  CHECK((s.state().tip - batch.timeline.back().tip).norm() < 1e-12);
  CHECK(*s.phantom() == *batch.phantom);
}

TEST_CASE("stop aborts a running scenario") {
  Session s("abort", default_robot_config(), fast_options());
  Wire w{s};
  w.send(msg("load_scenario", {{"name", "S2"}}));
  w.send(msg("start"));
  w.tick(100);
  const auto reply = w.send(msg("stop"));
  CHECK(has_event(reply, "scenario-stopped"));
  CHECK(s.mode() != SessionMode::Scripted);
  REQUIRE(s.last_record() != nullptr);
  CHECK_FALSE(s.last_record()->timeline.empty());
  const JointState held = s.state().joints;
  w.tick(5);
  CHECK(s.state().joints.inner_translation == held.inner_translation);
  CHECK(s.state().joints.outer_translation == held.outer_translation);
}

TEST_CASE("tiles") {
  SessionOptions o = fast_options();
  o.tile_rate = 50.0;
  o.voxel_size = 2.0;
  Session s("tiles", default_robot_config(), o);
  const auto full = s.handle_message(msg("state", {{"tiles", "full"}}));
  REQUIRE(full.size() == 1);
  const Json& tiles = full[0]["payload"]["tiles"];
  REQUIRE(tiles.is_array());
  std::size_t pixels = 0;
  for (const auto& t : tiles) {
    CHECK(t["pixels"].size() == t["width"].get<std::size_t>() * t["height"].get<std::size_t>());
    pixels += t["pixels"].size();
  }
  const VoxelPhantom& p = *s.phantom();
  const GrayImage z = project(p, Axis::Z), y = project(p, Axis::Y);
  CHECK(pixels == z.pixels.size() + y.pixels.size());
  // Nothing changed, so the next tick sends no tiles.
  const auto out = s.tick();
  CHECK_FALSE(out.back()["payload"].contains("tiles"));
}

TEST_CASE("golden transcript") {
  Session s("golden", default_robot_config(), fast_options());
  std::ostringstream got;
  auto record = [&](const std::vector<Json>& out) {
    for (const auto& m : out) got << to_wire(m) << '\n';
  };
  auto send = [&](const std::string& line) { record(s.handle_line(line)); };
  auto tick = [&](int n) {
    for (int i = 0; i < n; ++i) record(s.tick());
  };
  send(R"({"v":1,"kind":"state","payload":{}})");
  send(R"({"v":1,"kind":"jog","payload":{"outer_roll":30,"inner_roll":900}})");
  tick(2);
  send(R"({"v":1,"kind":"stop","payload":{}})");
  tick(1);
  send(R"({"v":1,"kind":"load_scenario","payload":{"name":"S2"}})");
  send(R"({"v":1,"kind":"start","payload":{}})");
  tick(2);
  send(R"({"v":1,"kind":"stop","payload":{}})");
  send(R"({"v":1,"kind":"reset","payload":{}})");
  tick(1);

  const auto path = kGolden / "session_transcript.ndjson";
  if (std::getenv("CTSDR_UPDATE_GOLDEN") != nullptr) {
    std::ofstream(path, std::ios::binary) << got.str();
  }
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing golden file; run with CTSDR_UPDATE_GOLDEN=1");
  std::ostringstream want;
  want << in.rdbuf();
  CHECK(got.str() == want.str());
}
