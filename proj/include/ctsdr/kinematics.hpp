// Copyright 2026 The ctsdr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ctsdr/model.hpp"

#include <Eigen/Dense>

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

namespace ctsdr {

enum TubeMember : unsigned { kOuterTube = 1u, kInnerTube = 2u };

/// One constant-curvature piece of the backbone. The curvature vector is
/// expressed in the local (x, y) cross-section axes at the segment start.
struct Segment {
  double length = 0.0;
  Eigen::Vector2d curvature = Eigen::Vector2d::Zero();
  unsigned members = 0;
};

struct SegmentStack {
  std::vector<Segment> segments;
  Frame base;

  double total_length() const;
};

struct CenterlineSample {
  double s = 0.0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d tangent = Eigen::Vector3d::UnitZ();
};

struct Centerline {
  std::vector<CenterlineSample> samples;
  double sample_step = 0.0;

  bool empty() const { return samples.empty(); }
  std::size_t size() const { return samples.size(); }
  double polyline_length() const;
  std::vector<Eigen::Vector3d> points() const;
};

struct CurvatureComponent {
  double bending_stiffness = 0.0;  // N*mm^2, or any consistent unit
  double precurvature = 0.0;       // 1/mm
  double roll_deg = 0.0;
};

/// Stiffness-weighted vector average of rotated pre-curvatures.
Eigen::Vector2d blend_curvature(std::span<const CurvatureComponent> components);

/// Splits the exposed backbone wherever the set of overlapping tubes (or a
/// tube's straight/curved transition) changes. Throws ContractViolation when
/// the inner tip is behind the outer tip.
SegmentStack decompose_segments(const RobotConfig& config, const JointState& joints);

/// Frame reached after travelling `length` along a constant-curvature arc.
Frame advance_arc(const Frame& start, const Eigen::Vector2d& curvature, double length);

struct KinematicsResult {
  Centerline centerline;
  Frame tip;
};

inline constexpr double kDefaultSampleStep = 0.1;

KinematicsResult forward_kinematics(const RobotConfig& config, const JointState& joints,
                                    double sample_step = kDefaultSampleStep);

/// Tip frame only; no sampling.
Frame tip_frame(const RobotConfig& config, const JointState& joints);
Frame tip_frame(const SegmentStack& stack);

struct JacobianSteps {
  double translation = 1e-4;  // mm
  double roll = 1e-3;         // deg
};

/// Columns: outer translation, inner translation, outer roll, inner roll.
/// Units mm/mm and mm/deg.
struct Jacobian {
  Eigen::Matrix<double, 3, 4> matrix = Eigen::Matrix<double, 3, 4>::Zero();
  /// True where a joint bound forced a one-sided difference.
  std::array<bool, 4> one_sided{};
};

Jacobian numeric_jacobian(const RobotConfig& config, const JointState& joints,
                          const JacobianSteps& steps = {});

/// Columns s_mm, x_mm, y_mm, z_mm, tx, ty, tz.
void write_centerline_csv(std::ostream& os, const Centerline& centerline);
/// Inverse of write_centerline_csv. Throws MalformedConfig on bad rows.
Centerline read_centerline_csv(std::istream& is);

}  // namespace ctsdr
