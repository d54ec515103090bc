// Copyright 2026 The ctsdr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ctsdr {

/// Sentinel radius for a tube without pre-curvature.
inline constexpr double kStraight = std::numeric_limits<double>::infinity();

/// Rigid frame. Local z is the backbone tangent and local x is the bend
/// direction of a tube at roll 0.
struct Frame {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  Eigen::Matrix3d orientation = Eigen::Matrix3d::Identity();

  Eigen::Vector3d tangent() const { return orientation.col(2); }
  bool is_orthonormal(double tol = 1e-9) const;
};

/// Sheath mouth at the world origin, advancing along +x, roll-0 bending
/// toward +y.
Frame default_sheath_pose();

/// Geometry and pre-curvature of one superelastic tube. Lengths in mm,
/// modulus in GPa.
struct TubeSpec {
  std::string name;
  double outer_diameter = 0.0;
  double wall_thickness = 0.0;
  double total_length = 0.0;
  double precurvature_radius = kStraight;
  double elastic_modulus = 60.0;
  double curved_fraction = 1.0;

  double inner_diameter() const { return outer_diameter - 2.0 * wall_thickness; }
  bool straight() const { return !std::isfinite(precurvature_radius); }
  /// Pre-curvature in 1/mm; zero for a straight tube.
  double curvature() const { return straight() ? 0.0 : 1.0 / precurvature_radius; }
  /// Length of the pre-curved distal portion.
  double curved_length() const { return curved_fraction * total_length; }
  /// Second moment of area of the annular section (mm^4).
  double second_moment() const;
  /// E*I in N*mm^2.
  double bending_stiffness() const;
};

struct SheathSpec {
  double inner_diameter = 4.0;
  double length = 150.0;
  Frame pose = default_sheath_pose();
};

struct DrillBitSpec {
  double bit_diameter = 6.0;
  double runout = 0.0;
  double min_cut_rpm = 200.0;
  double torque_coil_od = 1.63;
  double shaft_od = 0.95;

  double cut_diameter() const { return bit_diameter + 2.0 * runout; }
  double cut_radius() const { return 0.5 * cut_diameter(); }
};

struct JointLimits {
  double outer_translation_min = 0.0;
  double outer_translation_max = 41.5;
  double inner_translation_min = 0.0;
  double inner_translation_max = 120.0;
  double max_translation_speed = 5.0;  // mm/s
  double max_roll_speed = 45.0;        // deg/s
};

struct RobotConfig {
  TubeSpec outer_tube;
  TubeSpec inner_tube;
  SheathSpec sheath;
  DrillBitSpec bit;
  JointLimits joint_limits;
  double feed_limit = 3.0;      // mm/s
  double spindle_max = 1000.0;  // rpm
  double feed_rate = 1.65;      // default insertion feed, mm/s
  double spindle_accel = 1000.0;  // rpm/s
  /// When set, replaces EI_outer / EI_inner in curvature blending.
  std::optional<double> effective_stiffness_ratio;
};

/// Four actuated DoF plus the spindle. Translations are exposed arc length
/// beyond the sheath mouth; rolls are absolute, in degrees.
struct JointState {
  double outer_translation = 0.0;
  double inner_translation = 0.0;
  double outer_roll = 0.0;
  double inner_roll = 0.0;
  double spindle = 0.0;

  double relative_roll() const { return inner_roll - outer_roll; }
  bool operator==(const JointState&) const = default;
};

struct Violation {
  std::string code;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool valid() const { return violations.empty(); }
  bool has(std::string_view code) const;
};

/// I = pi/64 (D^4 - d^4). Throws InvalidArgument unless D > d >= 0.
double second_moment_of_area(double outer_diameter, double inner_diameter);

ValidationReport validate_config(const RobotConfig& config);

/// The two-tube NiTi prototype: 3.61/0.25 x 110 mm outer, 2.6/0.2 x 290 mm
/// inner, both heat-set to a 50 mm radius, 6 mm ball-nose bit.
RobotConfig default_robot_config();

/// EI_outer / EI_inner, or the calibrated override when present.
double stiffness_ratio(const RobotConfig& config);

/// Channel clearance left around the outer tube by the nominal bit.
double channel_clearance(const RobotConfig& config);

}  // namespace ctsdr
