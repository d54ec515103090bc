// Copyright 2026 The ctsdr Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctsdr/error.hpp"
#include "ctsdr/json_io.hpp"
#include "ctsdr/kinematics.hpp"

#include "doctest.h"

#include <filesystem>
#include <fstream>

using namespace ctsdr;

namespace {

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return static_cast<ErrorCode>(0);  // no error
}

}  // namespace

TEST_CASE("config round trip") {
  RobotConfig cfg = default_robot_config();
  cfg.bit.runout = 0.7;
  cfg.effective_stiffness_ratio = 1.55;
  cfg.outer_tube.precurvature_radius = kStraight;
  const Json j = to_json(cfg);
  CHECK(j["outer_tube"]["precurvature_radius"] == "straight");
  CHECK(to_json(config_from_json(j)) == j);
  const RobotConfig back = config_from_json(j);
  CHECK(back.outer_tube.straight());
  REQUIRE(back.effective_stiffness_ratio);
  CHECK(*back.effective_stiffness_ratio == 1.55);
}

TEST_CASE("partial override keeps defaults") {
  const RobotConfig def = default_robot_config();
  const RobotConfig c = config_from_json(Json::parse(R"({"bit": {"runout": 0.7}, "feed_rate": 1.2})"));
  CHECK(c.bit.runout == 0.7);
  CHECK(c.feed_rate == 1.2);
  CHECK(c.bit.bit_diameter == def.bit.bit_diameter);
  CHECK(c.inner_tube.precurvature_radius == def.inner_tube.precurvature_radius);
  CHECK(to_json(config_from_json(Json::object())) == to_json(def));
}

TEST_CASE("bad configs are malformed") {
  for (const char* text : {R"({"outer_tube": {"outer_diameter": "wide"}})", R"({"colour": 1})",
                           R"({"bit": {"runout": true}})", R"({"sheath": {"pose": {"origin": [1, 2]}}})", R"([1, 2])",
                           R"({"inner_tube": {"precurvature_radius": "bent"}})"}) {
    CAPTURE(text);
    CHECK(code_of([&] { config_from_json(Json::parse(text)); }) == ErrorCode::MalformedConfig);
  }
}

TEST_CASE("config files") {
  const auto dir = std::filesystem::temp_directory_path() / "ctsdr_test_json";
  std::filesystem::create_directories(dir);
  CHECK(code_of([&] { load_config(dir / "missing.json"); }) == ErrorCode::Io);
  {
    std::ofstream(dir / "broken.json") << "{ not json";
  }
  CHECK(code_of([&] { load_config(dir / "broken.json"); }) == ErrorCode::MalformedConfig);
  write_json_file(dir / "ok.json", to_json(default_robot_config()));
  CHECK(to_json(load_config(dir / "ok.json")) == to_json(default_robot_config()));
  std::filesystem::remove_all(dir);
}

TEST_CASE("joints and frames") {
  const JointState q{12.5, 40.0, -30.0, 150.0, 900.0};
  CHECK(joints_from_json(to_json(q)) == q);
  CHECK(code_of([] { joints_from_json(Json::parse(R"({"elbow": 1})")); }) == ErrorCode::MalformedConfig);

  const Frame f = default_sheath_pose();
  const Frame g = frame_from_json(to_json(f));
  CHECK(g.origin == f.origin);
  CHECK(g.orientation == f.orientation);
  CHECK(vec_from_json(vec_to_json(Eigen::Vector3d(1, -2, 3.5))) == Eigen::Vector3d(1, -2, 3.5));
}

TEST_CASE("scenario scripts round trip") {
  const RobotConfig cfg = default_robot_config();
  for (const auto& s : builtin_scenarios(cfg)) {
    CAPTURE(s.name);
    const Json j = to_json(s);
    const ScenarioScript back = script_from_json(j);
    CHECK(to_json(back) == j);
    CHECK(back.phases.size() == s.phases.size());
  }
}

TEST_CASE("bad scripts are malformed") {
  for (const char* text :
       {R"({"name": "x"})", R"({"name": "x", "phases": [{"velocity": {"elbow": 1}}]})",
        R"({"name": "x", "phases": [{"until": [{"dof": "inner_translation"}]}]})",
        R"({"name": "x", "phases": [{"until": [{"dof": "knee", "target": 3}]}]})",
        R"({"name": "x", "phases": [], "extra": 1})"}) {
    CAPTURE(text);
    CHECK(code_of([&] { script_from_json(Json::parse(text)); }) == ErrorCode::MalformedConfig);
  }
}

TEST_CASE("plan requests") {
  PlanRequest r = plan_request_from_json(Json::parse(R"({"target": [39.1, 74.5, 0], "total_length": 90.7})"));
  CHECK(r.target == Eigen::Vector3d(39.1, 74.5, 0.0));
  CHECK(r.total_length == 90.7);
  CHECK_FALSE(r.continuous_roll);
  CHECK(r.allowed_relative_rolls == std::vector<double>{0.0, 90.0, 180.0});

  r = plan_request_from_json(Json::parse(
      R"({"target": [1, 2, 3], "allowed_relative_rolls": "continuous", "curvature_search": {"enabled": true}})"));
  CHECK(r.continuous_roll);
  CHECK(r.curvature.enabled);
  CHECK(to_json(plan_request_from_json(to_json(r))) == to_json(r));

  CHECK(code_of([] { plan_request_from_json(Json::parse(R"({"total_length": 90})")); }) ==
        ErrorCode::MalformedConfig);
  CHECK(code_of([] { plan_request_from_json(Json::parse(R"({"target": [1, 2, 3], "allowed_relative_rolls": 4})")); }) ==
        ErrorCode::MalformedConfig);
}

TEST_CASE("ideal parameters") {
  IdealParameters p;
  p.first_length = 40.7;
  p.second_length = 50.0;
  p.first_radius = 91.23;
  p.second_radius = 50.0;
  const Json j = to_json(p);
  CHECK(to_json(ideal_from_json(j)) == j);
  p.first_radius.reset();
  CHECK(to_json(p)["first_radius"].is_null());
  CHECK_FALSE(ideal_from_json(to_json(p)).first_radius);
}

TEST_CASE("plan results serialize") {
  const RobotConfig cfg = default_robot_config();
  PlanRequest req;
  req.target = tip_frame(cfg, JointState{40.7, 90.7, 0.0, 180.0, 0.0}).origin;
  req.total_length = 90.7;
  const PlanResult r = plan_s_shape(req, cfg);
  const Json j = to_json(r);
  CHECK(j.contains("joints"));
  CHECK(j.contains("ranking"));
  CHECK(j.at("ranking").size() == r.ranking.size());
  CHECK(j.dump().find("nan") == std::string::npos);
}
