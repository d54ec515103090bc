// Copyright 2026 The ctsdr Authors
// SPDX-License-Identifier: Apache-2.0
//
// Helpers shared by the unit, property and acceptance tests.

#pragma once

#include "ctsdr/drill_sim.hpp"
#include "ctsdr/kinematics.hpp"
#include "ctsdr/model.hpp"
#include "ctsdr/phantom.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

namespace testing {

inline double deg2rad(double d) { return d * M_PI / 180.0; }

// Uniform feasible joint state: outer within its travel, inner ahead of it.
inline ctsdr::JointState random_joints(std::mt19937_64& rng, const ctsdr::RobotConfig& config,
                                       double relative_roll) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto& lim = config.joint_limits;
  ctsdr::JointState q;
  q.outer_translation = lim.outer_translation_max * unit(rng);
  q.inner_translation = q.outer_translation + (lim.inner_translation_max - q.outer_translation) * unit(rng);
  q.outer_roll = -180.0 + 360.0 * unit(rng);
  q.inner_roll = q.outer_roll + relative_roll;
  return q;
}

// Rotation by `deg` about the sheath axis through the mouth.
inline Eigen::Matrix3d sheath_roll(const ctsdr::RobotConfig& config, double deg) {
  return Eigen::AngleAxisd(deg2rad(deg), config.sheath.pose.tangent()).toRotationMatrix();
}

inline double max_pointwise_distance(const ctsdr::Centerline& a, const ctsdr::Centerline& b,
                                     const Eigen::Matrix3d& rotate_a, const Eigen::Vector3d& pivot) {
  if (a.size() != b.size()) return INFINITY;
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Eigen::Vector3d pa = pivot + rotate_a * (a.samples[i].position - pivot);
    worst = std::max(worst, (pa - b.samples[i].position).norm());
  }
  return worst;
}

// Spin-up, then inner-only advance to `length`: a single constant-curvature arc.
inline ctsdr::ScenarioScript single_arc_script(const ctsdr::RobotConfig& config, double length) {
  ctsdr::ScenarioScript script;
  script.name = "single-arc";
  script.description = "inner tube alone, advanced along its pre-curved arc";
  ctsdr::Command spin;
  spin.phase = "spin-up";
  spin.spindle_target = config.spindle_max;
  spin.until_spindle = true;
  ctsdr::Command advance;
  advance.phase = "inner-advance";
  advance.velocity[static_cast<int>(ctsdr::Dof::InnerTranslation)] = config.feed_rate;
  advance.spindle_target = config.spindle_max;
  advance.until.push_back({ctsdr::Dof::InnerTranslation, length});
  script.phases = {spin, advance};
  return script;
}

inline ctsdr::RunRecord run_on_default_phantom(const ctsdr::ScenarioScript& script, const ctsdr::RobotConfig& config,
                                               double voxel_size, double dt = 0.01) {
  auto phantom =
      std::make_shared<ctsdr::VoxelPhantom>(ctsdr::default_scenario_phantom(config.sheath.pose, voxel_size));
  return ctsdr::run_scenario(script, config, phantom, ctsdr::RunOptions{dt});
}

inline bool same_joints(const ctsdr::JointState& a, const ctsdr::JointState& b) { return a == b; }

// Bit-identical comparison of everything a run records.
inline bool identical_records(const ctsdr::RunRecord& a, const ctsdr::RunRecord& b) {
  if (a.scenario != b.scenario || a.dt != b.dt || a.faulted != b.faulted || a.flagged != b.flagged) return false;
  if (a.contact_time != b.contact_time || a.insertion_end_time != b.insertion_end_time) return false;
  if (a.timeline.size() != b.timeline.size() || a.events.size() != b.events.size()) return false;
  for (std::size_t i = 0; i < a.timeline.size(); ++i) {
    const auto& x = a.timeline[i];
    const auto& y = b.timeline[i];
    if (x.t != y.t || x.phase != y.phase || !(x.joints == y.joints) || x.tip != y.tip) return false;
  }
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    const auto& x = a.events[i];
    const auto& y = b.events[i];
    if (x.t != y.t || x.type != y.type || x.phase != y.phase || x.message != y.message || x.value != y.value)
      return false;
  }
  if (a.tip_locus.size() != b.tip_locus.size()) return false;
  for (std::size_t i = 0; i < a.tip_locus.size(); ++i) {
    if (a.tip_locus.samples[i].position != b.tip_locus.samples[i].position) return false;
  }
  if (static_cast<bool>(a.phantom) != static_cast<bool>(b.phantom)) return false;
  return !a.phantom || *a.phantom == *b.phantom;
}

}  // namespace testing
