// Copyright 2026 The ctsdr Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctsdr/json_io.hpp"

#include "ctsdr/error.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace ctsdr {

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::MalformedConfig, what); }

void require_object(const Json& j, const std::string& where) {
  if (!j.is_object()) malformed(where + ": expected an object");
}

void check_keys(const Json& j, const std::string& where, std::initializer_list<const char*> known) {
  require_object(j, where);
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) malformed(where + ": unknown key '" + key + "'");
  }
}

void read_number(const Json& j, const char* key, double& out, const std::string& where) {
  if (!j.contains(key)) return;
  const Json& v = j.at(key);
  if (!v.is_number()) malformed(where + "." + key + ": expected a number");
  out = v.get<double>();
}

void read_int(const Json& j, const char* key, int& out, const std::string& where) {
  if (!j.contains(key)) return;
  const Json& v = j.at(key);
  if (!v.is_number_integer()) malformed(where + "." + key + ": expected an integer");
  out = v.get<int>();
}

void read_bool(const Json& j, const char* key, bool& out, const std::string& where) {
  if (!j.contains(key)) return;
  const Json& v = j.at(key);
  if (!v.is_boolean()) malformed(where + "." + key + ": expected true or false");
  out = v.get<bool>();
}

void read_string(const Json& j, const char* key, std::string& out, const std::string& where) {
  if (!j.contains(key)) return;
  const Json& v = j.at(key);
  if (!v.is_string()) malformed(where + "." + key + ": expected a string");
  out = v.get<std::string>();
}

Json radius_to_json(double r) { return std::isfinite(r) ? Json(r) : Json("straight"); }

double radius_from_json(const Json& v, const std::string& where) {
  if (v.is_string() && v.get<std::string>() == "straight") return kStraight;
  if (!v.is_number()) malformed(where + ": expected a radius in mm or \"straight\"");
  return v.get<double>();
}

Json tube_to_json(const TubeSpec& t) {
  return Json{{"name", t.name},
              {"outer_diameter", t.outer_diameter},
              {"wall_thickness", t.wall_thickness},
              {"total_length", t.total_length},
              {"precurvature_radius", radius_to_json(t.precurvature_radius)},
              {"elastic_modulus", t.elastic_modulus},
              {"curved_fraction", t.curved_fraction}};
}

void tube_from_json(const Json& j, TubeSpec& t, const std::string& where) {
  check_keys(j, where,
             {"name", "outer_diameter", "wall_thickness", "total_length", "precurvature_radius", "elastic_modulus",
              "curved_fraction"});
  read_string(j, "name", t.name, where);
  read_number(j, "outer_diameter", t.outer_diameter, where);
  read_number(j, "wall_thickness", t.wall_thickness, where);
  read_number(j, "total_length", t.total_length, where);
  if (j.contains("precurvature_radius")) {
    t.precurvature_radius = radius_from_json(j.at("precurvature_radius"), where + ".precurvature_radius");
  }
  read_number(j, "elastic_modulus", t.elastic_modulus, where);
  read_number(j, "curved_fraction", t.curved_fraction, where);
}

Json stat_to_json(const Stat& s) {
  if (s.n == 0) return Json{{"mean", nullptr}, {"std", nullptr}, {"n", 0}};
  return Json{{"mean", s.mean}, {"std", s.stddev}, {"n", s.n}};
}

Json optional_to_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json segment_to_json(const SegmentMeasurement& m) {
  return Json{{"length", m.length}, {"fit", to_json(m.fit)}, {"diameter", optional_to_json(m.diameter)}};
}

Json command_to_json(const Command& c) {
  Json velocity = Json::object();
  for (std::size_t d = 0; d < 4; ++d) {
    if (c.velocity[d] != 0.0) velocity[kDofNames[d]] = c.velocity[d];
  }
  Json until = Json::array();
  for (const auto& u : c.until) until.push_back({{"dof", kDofNames[static_cast<std::size_t>(u.dof)]}, {"target", u.target}});
  Json j{{"phase", c.phase}, {"velocity", velocity}, {"spindle_target", c.spindle_target}, {"until", until}};
  if (c.duration) j["duration"] = *c.duration;
  if (c.until_spindle) j["until_spindle"] = true;
  return j;
}

Command command_from_json(const Json& j, const std::string& where) {
  check_keys(j, where, {"phase", "velocity", "spindle_target", "duration", "until", "until_spindle"});
  Command c;
  read_string(j, "phase", c.phase, where);
  if (j.contains("velocity")) {
    const Json& v = j.at("velocity");
    require_object(v, where + ".velocity");
    for (const auto& [key, value] : v.items()) {
      Dof dof;
      try {
        dof = parse_dof(key);
      } catch (const Error&) {
        malformed(where + ".velocity: unknown DoF '" + key + "'");
      }
      if (!value.is_number()) malformed(where + ".velocity." + key + ": expected a number");
      c.velocity[static_cast<std::size_t>(dof)] = value.get<double>();
    }
  }
  read_number(j, "spindle_target", c.spindle_target, where);
  if (j.contains("duration")) {
    double d = 0.0;
    read_number(j, "duration", d, where);
    c.duration = d;
  }
  if (j.contains("until")) {
    const Json& u = j.at("until");
    if (!u.is_array()) malformed(where + ".until: expected an array");
    for (const auto& item : u) {
      check_keys(item, where + ".until[]", {"dof", "target"});
      if (!item.contains("dof") || !item.at("dof").is_string() || !item.contains("target") ||
          !item.at("target").is_number()) {
        malformed(where + ".until[]: needs a dof name and a numeric target");
      }
      Until cond;
      try {
        cond.dof = parse_dof(item.at("dof").get<std::string>());
      } catch (const Error&) {
        malformed(where + ".until[]: unknown DoF '" + item.at("dof").get<std::string>() + "'");
      }
      cond.target = item.at("target").get<double>();
      c.until.push_back(cond);
    }
  }
  read_bool(j, "until_spindle", c.until_spindle, where);
  return c;
}

}  // namespace

Json vec_to_json(const Eigen::Vector3d& v) { return Json::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d vec_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) malformed("expected a 3-vector");
  Eigen::Vector3d v;
  for (int i = 0; i < 3; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number()) malformed("expected a numeric 3-vector");
    v(i) = j[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

Json to_json(const Frame& frame) {
  Json rows = Json::array();
  for (int r = 0; r < 3; ++r) {
    rows.push_back({frame.orientation(r, 0), frame.orientation(r, 1), frame.orientation(r, 2)});
  }
  return Json{{"origin", vec_to_json(frame.origin)}, {"orientation", rows}};
}

Frame frame_from_json(const Json& j) {
  check_keys(j, "pose", {"origin", "orientation"});
  Frame f = default_sheath_pose();
  if (j.contains("origin")) f.origin = vec_from_json(j.at("origin"));
  if (j.contains("orientation")) {
    const Json& rows = j.at("orientation");
    if (!rows.is_array() || rows.size() != 3) malformed("pose.orientation: expected 3 rows");
    for (std::size_t r = 0; r < 3; ++r) {
      const Eigen::Vector3d row = vec_from_json(rows[r]);
      f.orientation.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
  }
  return f;
}

Json to_json(const RobotConfig& c) {
  const auto& lim = c.joint_limits;
  Json j{{"outer_tube", tube_to_json(c.outer_tube)},
         {"inner_tube", tube_to_json(c.inner_tube)},
         {"sheath", {{"inner_diameter", c.sheath.inner_diameter}, {"length", c.sheath.length}, {"pose", to_json(c.sheath.pose)}}},
         {"bit",
          {{"bit_diameter", c.bit.bit_diameter},
           {"runout", c.bit.runout},
           {"min_cut_rpm", c.bit.min_cut_rpm},
           {"torque_coil_od", c.bit.torque_coil_od},
           {"shaft_od", c.bit.shaft_od}}},
         {"joint_limits",
          {{"outer_translation_min", lim.outer_translation_min},
           {"outer_translation_max", lim.outer_translation_max},
           {"inner_translation_min", lim.inner_translation_min},
           {"inner_translation_max", lim.inner_translation_max},
           {"max_translation_speed", lim.max_translation_speed},
           {"max_roll_speed", lim.max_roll_speed}}},
         {"feed_limit", c.feed_limit},
         {"spindle_max", c.spindle_max},
         {"feed_rate", c.feed_rate},
         {"spindle_accel", c.spindle_accel},
         {"effective_stiffness_ratio", optional_to_json(c.effective_stiffness_ratio)}};
  return j;
}

RobotConfig config_from_json(const Json& j) {
  check_keys(j, "config",
             {"outer_tube", "inner_tube", "sheath", "bit", "joint_limits", "feed_limit", "spindle_max", "feed_rate",
              "spindle_accel", "effective_stiffness_ratio"});
  RobotConfig c = default_robot_config();
  if (j.contains("outer_tube")) tube_from_json(j.at("outer_tube"), c.outer_tube, "outer_tube");
  if (j.contains("inner_tube")) tube_from_json(j.at("inner_tube"), c.inner_tube, "inner_tube");
  if (j.contains("sheath")) {
    const Json& s = j.at("sheath");
    check_keys(s, "sheath", {"inner_diameter", "length", "pose"});
    read_number(s, "inner_diameter", c.sheath.inner_diameter, "sheath");
    read_number(s, "length", c.sheath.length, "sheath");
    if (s.contains("pose")) c.sheath.pose = frame_from_json(s.at("pose"));
  }
  if (j.contains("bit")) {
    const Json& b = j.at("bit");
    check_keys(b, "bit", {"bit_diameter", "runout", "min_cut_rpm", "torque_coil_od", "shaft_od"});
    read_number(b, "bit_diameter", c.bit.bit_diameter, "bit");
    read_number(b, "runout", c.bit.runout, "bit");
    read_number(b, "min_cut_rpm", c.bit.min_cut_rpm, "bit");
    read_number(b, "torque_coil_od", c.bit.torque_coil_od, "bit");
    read_number(b, "shaft_od", c.bit.shaft_od, "bit");
  }
  if (j.contains("joint_limits")) {
    const Json& l = j.at("joint_limits");
    auto& lim = c.joint_limits;
    check_keys(l, "joint_limits",
               {"outer_translation_min", "outer_translation_max", "inner_translation_min", "inner_translation_max",
                "max_translation_speed", "max_roll_speed"});
    read_number(l, "outer_translation_min", lim.outer_translation_min, "joint_limits");
    read_number(l, "outer_translation_max", lim.outer_translation_max, "joint_limits");
    read_number(l, "inner_translation_min", lim.inner_translation_min, "joint_limits");
    read_number(l, "inner_translation_max", lim.inner_translation_max, "joint_limits");
    read_number(l, "max_translation_speed", lim.max_translation_speed, "joint_limits");
    read_number(l, "max_roll_speed", lim.max_roll_speed, "joint_limits");
  }
  read_number(j, "feed_limit", c.feed_limit, "config");
  read_number(j, "spindle_max", c.spindle_max, "config");
  read_number(j, "feed_rate", c.feed_rate, "config");
  read_number(j, "spindle_accel", c.spindle_accel, "config");
  if (j.contains("effective_stiffness_ratio") && !j.at("effective_stiffness_ratio").is_null()) {
    double rho = 0.0;
    read_number(j, "effective_stiffness_ratio", rho, "config");
    c.effective_stiffness_ratio = rho;
  }
  return c;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    malformed(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

RobotConfig load_config(const std::filesystem::path& path) { return config_from_json(read_json_file(path)); }

Json to_json(const ValidationReport& report) {
  Json v = Json::array();
  for (const auto& x : report.violations) v.push_back({{"code", x.code}, {"message", x.message}});
  return Json{{"valid", report.valid()}, {"violations", v}};
}

Json to_json(const JointState& q) {
  return Json{{"outer_translation", q.outer_translation},
              {"inner_translation", q.inner_translation},
              {"outer_roll", q.outer_roll},
              {"inner_roll", q.inner_roll},
              {"spindle", q.spindle}};
}

JointState joints_from_json(const Json& j) {
  check_keys(j, "joints", {"outer_translation", "inner_translation", "outer_roll", "inner_roll", "spindle"});
  JointState q;
  read_number(j, "outer_translation", q.outer_translation, "joints");
  read_number(j, "inner_translation", q.inner_translation, "joints");
  read_number(j, "outer_roll", q.outer_roll, "joints");
  read_number(j, "inner_roll", q.inner_roll, "joints");
  read_number(j, "spindle", q.spindle, "joints");
  return q;
}

Json to_json(const ScenarioScript& s) {
  Json phases = Json::array();
  for (const auto& c : s.phases) phases.push_back(command_to_json(c));
  return Json{{"name", s.name}, {"description", s.description}, {"initial", to_json(s.initial)}, {"phases", phases}};
}

ScenarioScript script_from_json(const Json& j) {
  check_keys(j, "script", {"name", "description", "initial", "phases"});
  ScenarioScript s;
  read_string(j, "name", s.name, "script");
  read_string(j, "description", s.description, "script");
  if (j.contains("initial")) s.initial = joints_from_json(j.at("initial"));
  if (!j.contains("phases") || !j.at("phases").is_array()) malformed("script.phases: expected an array");
  const Json& phases = j.at("phases");
  for (std::size_t i = 0; i < phases.size(); ++i) {
    s.phases.push_back(command_from_json(phases[i], "script.phases[" + std::to_string(i) + "]"));
  }
  return s;
}

Json to_json(const RunEvent& e) {
  Json j{{"t", e.t}, {"type", e.type}, {"phase", e.phase}, {"message", e.message}};
  if (e.value) j["value"] = *e.value;
  return j;
}

Json to_json(std::span<const RunEvent> events) {
  Json a = Json::array();
  for (const auto& e : events) a.push_back(to_json(e));
  return a;
}

Json to_json(const ArcFit& fit) {
  Json j{{"radius", fit.unbounded ? Json(nullptr) : Json(fit.radius)},
         {"unbounded", fit.unbounded},
         {"arc_length", fit.arc_length},
         {"rmse", fit.rmse},
         {"normal", vec_to_json(fit.normal)}};
  if (!fit.unbounded) j["center"] = vec_to_json(fit.center);
  return j;
}

Json to_json(const IdealParameters& ideal) {
  return Json{{"first_length", ideal.first_length},
              {"second_length", ideal.second_length},
              {"first_radius", optional_to_json(ideal.first_radius)},
              {"second_radius", radius_to_json(ideal.second_radius)}};
}

IdealParameters ideal_from_json(const Json& j) {
  check_keys(j, "ideal", {"first_length", "second_length", "first_radius", "second_radius"});
  IdealParameters p;
  read_number(j, "first_length", p.first_length, "ideal");
  read_number(j, "second_length", p.second_length, "ideal");
  if (j.contains("first_radius") && !j.at("first_radius").is_null()) {
    p.first_radius = radius_from_json(j.at("first_radius"), "ideal.first_radius");
  }
  if (j.contains("second_radius")) p.second_radius = radius_from_json(j.at("second_radius"), "ideal.second_radius");
  return p;
}

Json to_json(const MetricsReport& r) {
  Json runs = Json::array();
  for (const auto& m : r.runs) {
    runs.push_back({{"label", m.label},
                    {"split_s", m.split_s},
                    {"planar", m.planar},
                    {"plane_angle_deg", m.plane_angle_deg},
                    {"first", segment_to_json(m.first)},
                    {"second", segment_to_json(m.second)}});
  }
  Json inner_outer{{"ideal_length", r.ideal.first_length},
                   {"measured_length", stat_to_json(r.first_length)},
                   {"length_error_pct", optional_to_json(r.first_length_error_pct)},
                   {"ideal_radius", optional_to_json(r.ideal.first_radius)},
                   {"measured_radius", stat_to_json(r.first_radius)},
                   {"radius_error_pct", optional_to_json(r.first_radius_error_pct)},
                   {"diameter", stat_to_json(r.first_diameter)}};
  Json inner{{"ideal_length", r.ideal.second_length},
             {"measured_length", stat_to_json(r.second_length)},
             {"length_error_pct", optional_to_json(r.second_length_error_pct)},
             {"ideal_radius", radius_to_json(r.ideal.second_radius)},
             {"measured_radius", stat_to_json(r.second_radius)},
             {"radius_error_pct", optional_to_json(r.second_radius_error_pct)},
             {"diameter", stat_to_json(r.second_diameter)}};
  return Json{{"inner_outer", inner_outer},
              {"inner", inner},
              {"plane_angle_deg", stat_to_json(r.plane_angle)},
              {"mean_diameter", optional_to_json(r.mean_diameter)},
              {"runs", runs},
              {"notes", r.notes}};
}

Json to_json(const PlanRequest& r) {
  Json rolls = Json::array();
  for (double x : r.allowed_relative_rolls) rolls.push_back(x);
  return Json{{"target", vec_to_json(r.target)},
              {"total_length", r.total_length},
              {"allowed_relative_rolls", r.continuous_roll ? Json("continuous") : rolls},
              {"curvature_search",
               {{"enabled", r.curvature.enabled},
                {"min_radius", r.curvature.min_radius},
                {"max_radius", r.curvature.max_radius},
                {"step", r.curvature.step}}},
              {"weights", {{"tip", r.weights.tip}, {"length", r.weights.length}}},
              {"translation_step", r.translation_step},
              {"roll_step", r.roll_step},
              {"refine_tolerance", r.refine_tolerance},
              {"top_k", r.top_k},
              {"max_tip_error", r.max_tip_error}};
}

PlanRequest plan_request_from_json(const Json& j) {
  check_keys(j, "plan request",
             {"target", "total_length", "allowed_relative_rolls", "curvature_search", "weights", "translation_step",
              "roll_step", "refine_tolerance", "top_k", "max_tip_error"});
  PlanRequest r;
  if (!j.contains("target")) malformed("plan request: missing target");
  r.target = vec_from_json(j.at("target"));
  const std::string where = "plan request";
  read_number(j, "total_length", r.total_length, where);
  if (j.contains("allowed_relative_rolls")) {
    const Json& a = j.at("allowed_relative_rolls");
    if (a.is_string() && a.get<std::string>() == "continuous") {
      r.continuous_roll = true;
    } else if (a.is_array()) {
      r.allowed_relative_rolls.clear();
      for (const auto& x : a) {
        if (!x.is_number()) malformed("allowed_relative_rolls: expected numbers");
        r.allowed_relative_rolls.push_back(x.get<double>());
      }
    } else {
      malformed("allowed_relative_rolls: expected an array or \"continuous\"");
    }
  }
  if (j.contains("curvature_search")) {
    const Json& c = j.at("curvature_search");
    check_keys(c, "curvature_search", {"enabled", "min_radius", "max_radius", "step"});
    read_bool(c, "enabled", r.curvature.enabled, "curvature_search");
    read_number(c, "min_radius", r.curvature.min_radius, "curvature_search");
    read_number(c, "max_radius", r.curvature.max_radius, "curvature_search");
    read_number(c, "step", r.curvature.step, "curvature_search");
  }
  if (j.contains("weights")) {
    const Json& w = j.at("weights");
    check_keys(w, "weights", {"tip", "length"});
    read_number(w, "tip", r.weights.tip, "weights");
    read_number(w, "length", r.weights.length, "weights");
  }
  read_number(j, "translation_step", r.translation_step, where);
  read_number(j, "roll_step", r.roll_step, where);
  read_number(j, "refine_tolerance", r.refine_tolerance, where);
  read_int(j, "top_k", r.top_k, where);
  read_number(j, "max_tip_error", r.max_tip_error, where);
  return r;
}

Json to_json(const RankedCandidate& c) {
  return Json{{"outer_length", c.candidate.outer_length},
              {"inner_length", c.candidate.inner_length},
              {"outer_roll", c.candidate.outer_roll},
              {"relative_roll", c.candidate.relative_roll},
              {"precurvature_radius", optional_to_json(c.candidate.precurvature_radius)},
              {"tip", vec_to_json(c.tip)},
              {"tip_error", c.tip_error},
              {"length_error", c.length_error},
              {"cost", c.cost}};
}

Json to_json(const PlanResult& r) {
  Json ranking = Json::array();
  for (const auto& c : r.ranking) ranking.push_back(to_json(c));
  return Json{{"joints", to_json(r.joints)},
              {"outer_length", r.best.outer_length},
              {"inner_length", r.best.inner_length},
              {"relative_roll", r.best.relative_roll},
              {"precurvature_radius", optional_to_json(r.best.precurvature_radius)},
              {"predicted_tip", vec_to_json(r.predicted_tip)},
              {"tip_error", r.tip_error},
              {"length_error", r.length_error},
              {"cost", r.cost},
              {"grid_cost", r.grid_cost},
              {"ranking", ranking}};
}

Json run_summary(const RunRecord& record) {
  const Eigen::Vector3d tip = record.timeline.empty() ? Eigen::Vector3d::Zero() : record.timeline.back().tip;
  return Json{{"scenario", record.scenario},
              {"dt", record.dt},
              {"steps", record.timeline.empty() ? 0 : record.timeline.size() - 1},
              {"faulted", record.faulted},
              {"flagged", record.flagged},
              {"contact_time", optional_to_json(record.contact_time)},
              {"insertion_end_time", optional_to_json(record.insertion_end_time)},
              {"insertion_time", optional_to_json(record.insertion_time())},
              {"final_joints", to_json(record.final_joints())},
              {"final_tip", vec_to_json(tip)},
              {"events", record.events.size()}};
}

}  // namespace ctsdr
