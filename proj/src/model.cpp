// Copyright 2026 The ctsdr Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctsdr/model.hpp"

#include "ctsdr/error.hpp"

#include <numbers>
#include <sstream>

namespace ctsdr {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::ContractViolation: return "contract violation";
    case ErrorCode::UnknownScenario: return "unknown scenario";
    case ErrorCode::MalformedConfig: return "malformed config";
    case ErrorCode::Io: return "i/o failure";
    case ErrorCode::RunFault: return "run fault";
    case ErrorCode::Unreachable: return "unreachable target";
    case ErrorCode::NoTunnel: return "no tunnel";
    case ErrorCode::Split: return "split failure";
    case ErrorCode::Infeasible: return "infeasible";
    case ErrorCode::Budget: return "voxel budget exceeded";
  }
  return "unknown error";
}

bool Frame::is_orthonormal(double tol) const {
  const Eigen::Matrix3d residual = orientation.transpose() * orientation - Eigen::Matrix3d::Identity();
  return residual.cwiseAbs().maxCoeff() <= tol && std::abs(orientation.determinant() - 1.0) <= tol;
}

Frame default_sheath_pose() {
  Frame f;
  // columns: local x -> +y, local y -> +z, local z (tangent) -> +x
  f.orientation << 0, 0, 1,
                   1, 0, 0,
                   0, 1, 0;
  return f;
}

double second_moment_of_area(double outer_diameter, double inner_diameter) {
  if (!(inner_diameter >= 0.0) || !(outer_diameter > inner_diameter)) {
    std::ostringstream msg;
    msg << "second_moment_of_area requires outer > inner >= 0 (got " << outer_diameter << ", "
        << inner_diameter << ")";
    throw Error(ErrorCode::InvalidArgument, msg.str());
  }
  const double d4 = inner_diameter * inner_diameter * inner_diameter * inner_diameter;
  const double D4 = outer_diameter * outer_diameter * outer_diameter * outer_diameter;
  return std::numbers::pi / 64.0 * (D4 - d4);
}

double TubeSpec::second_moment() const {
  return second_moment_of_area(outer_diameter, inner_diameter());
}

double TubeSpec::bending_stiffness() const {
  // GPa -> N/mm^2
  return elastic_modulus * 1.0e3 * second_moment();
}

bool ValidationReport::has(std::string_view code) const {
  for (const auto& v : violations) {
    if (v.code == code) return true;
  }
  return false;
}

namespace {

void check_tube(const TubeSpec& tube, std::string_view role, std::vector<Violation>& out) {
  auto add = [&](std::string code, const std::string& what) {
    out.push_back({std::move(code), std::string(role) + " tube: " + what});
  };
  if (!(tube.wall_thickness > 0.0) || !(tube.outer_diameter > 2.0 * tube.wall_thickness)) {
    add("tube geometry", "requires outer_diameter > 2 x wall_thickness > 0");
  }
  if (!(tube.precurvature_radius > 0.0)) add("tube curvature", "precurvature_radius must be positive");
  if (!(tube.total_length > 0.0)) add("tube length", "total_length must be positive");
  if (!(tube.curved_fraction > 0.0 && tube.curved_fraction <= 1.0)) {
    add("tube curved fraction", "curved_fraction must lie in (0, 1]");
  }
  if (!(tube.elastic_modulus > 0.0)) add("tube modulus", "elastic_modulus must be positive");
}

}  // namespace

ValidationReport validate_config(const RobotConfig& config) {
  ValidationReport report;
  auto& out = report.violations;
  const auto& outer = config.outer_tube;
  const auto& inner = config.inner_tube;

  check_tube(outer, "outer", out);
  check_tube(inner, "inner", out);

  if (!(inner.outer_diameter < outer.inner_diameter())) {
    out.push_back({"nesting clearance", "inner tube OD must be smaller than outer tube ID"});
  }
  if (!(config.bit.torque_coil_od < inner.inner_diameter())) {
    out.push_back({"coil clearance", "torque coil OD must be smaller than inner tube ID"});
  }
  if (!(outer.outer_diameter <= config.sheath.inner_diameter)) {
    out.push_back({"sheath clearance", "outer tube OD must not exceed sheath ID"});
  }
  if (!(config.bit.bit_diameter > 0.0)) {
    out.push_back({"bit geometry", "bit_diameter must be positive"});
  } else if (!(config.bit.bit_diameter > outer.outer_diameter)) {
    out.push_back({"bit smaller than outer tube", "bit must cut a channel wider than the outer tube"});
  }
  if (!(config.bit.runout >= 0.0)) out.push_back({"bit runout", "runout must be non-negative"});
  if (!(config.sheath.length > 0.0)) out.push_back({"sheath length", "sheath length must be positive"});
  if (!config.sheath.pose.is_orthonormal()) {
    out.push_back({"sheath pose", "sheath orientation must be a rotation"});
  }

  const auto& lim = config.joint_limits;
  if (!(lim.outer_translation_min <= lim.outer_translation_max) ||
      !(lim.inner_translation_min <= lim.inner_translation_max)) {
    out.push_back({"joint limits", "translation min must not exceed max"});
  }
  if (!(lim.max_translation_speed > 0.0) || !(lim.max_roll_speed > 0.0)) {
    out.push_back({"joint speed limits", "speed limits must be positive"});
  }
  if (!(config.feed_limit > 0.0)) out.push_back({"feed limit", "feed_limit must be positive"});
  if (!(config.feed_rate > 0.0)) out.push_back({"feed rate", "feed_rate must be positive"});
  if (!(config.spindle_max > 0.0)) out.push_back({"spindle max", "spindle_max must be positive"});
  if (!(config.spindle_accel > 0.0)) out.push_back({"spindle accel", "spindle_accel must be positive"});
  if (config.effective_stiffness_ratio && !(*config.effective_stiffness_ratio > 0.0)) {
    out.push_back({"stiffness ratio", "effective_stiffness_ratio must be positive"});
  }
  return report;
}

RobotConfig default_robot_config() {
  RobotConfig c;
  c.outer_tube = TubeSpec{"outer NiTi", 3.61, 0.25, 110.0, 50.0, 60.0, 1.0};
  c.inner_tube = TubeSpec{"inner NiTi", 2.6, 0.2, 290.0, 50.0, 60.0, 1.0};
  c.sheath = SheathSpec{};
  c.bit = DrillBitSpec{};
  c.joint_limits = JointLimits{};
  c.feed_limit = 3.0;
  c.spindle_max = 1000.0;
  c.feed_rate = 1.65;
  c.spindle_accel = 1000.0;
  return c;
}

double stiffness_ratio(const RobotConfig& config) {
  if (config.effective_stiffness_ratio) return *config.effective_stiffness_ratio;
  return config.outer_tube.bending_stiffness() / config.inner_tube.bending_stiffness();
}

double channel_clearance(const RobotConfig& config) {
  return 0.5 * config.bit.bit_diameter - 0.5 * config.outer_tube.outer_diameter;
}

}  // namespace ctsdr
