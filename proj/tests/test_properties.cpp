// Copyright 2026 The ctsdr Authors
// SPDX-License-Identifier: Apache-2.0
//
// Seeded property checks over random joint states, carves and plans.

#include "ctsdr/analysis.hpp"
#include "ctsdr/drill_sim.hpp"
#include "ctsdr/kinematics.hpp"
#include "ctsdr/planner.hpp"

#include "doctest.h"
#include "support.hpp"

#include <cmath>
#include <random>

using namespace ctsdr;

TEST_CASE("a common roll rotates the whole shape about the sheath axis") {
  const RobotConfig cfg = default_robot_config();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> angle(-360.0, 360.0);
  for (int i = 0; i < 100; ++i) {
    const JointState q = testing::random_joints(rng, cfg, angle(rng));
    const double delta = angle(rng);
    JointState r = q;
    r.outer_roll += delta;
    r.inner_roll += delta;
    const auto a = forward_kinematics(cfg, q).centerline;
    const auto b = forward_kinematics(cfg, r).centerline;
    CHECK(testing::max_pointwise_distance(a, b, testing::sheath_roll(cfg, delta), cfg.sheath.pose.origin) < 1e-9);
  }
}

TEST_CASE("centerline length equals inner insertion") {
  const RobotConfig cfg = default_robot_config();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> angle(0.0, 360.0);
  for (int i = 0; i < 100; ++i) {
    const JointState q = testing::random_joints(rng, cfg, angle(rng));
    const auto c = forward_kinematics(cfg, q).centerline;
    CHECK(c.samples.back().s == doctest::Approx(q.inner_translation));
    if (q.inner_translation > 1.0) {
      CHECK(std::abs(c.polyline_length() - q.inner_translation) / q.inner_translation < 1e-3);
    }
  }
}

TEST_CASE("relative rolls of 0 or 180 keep the shape planar") {
  const RobotConfig cfg = default_robot_config();
  std::mt19937_64 rng(3);
  for (int i = 0; i < 60; ++i) {
    const JointState q = testing::random_joints(rng, cfg, (i % 2) * 180.0);
    const auto c = forward_kinematics(cfg, q).centerline;
    // Plane through the sheath axis, turned by the outer roll.
    const Eigen::Matrix3d roll = testing::sheath_roll(cfg, q.outer_roll);
    const Eigen::Vector3d normal = roll * cfg.sheath.pose.orientation.col(1);
    double worst = 0.0;
    for (const auto& s : c.samples) worst = std::max(worst, std::abs((s.position - cfg.sheath.pose.origin).dot(normal)));
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("blended curvature lies between the opposed and aligned extremes") {
  const RobotConfig cfg = default_robot_config();
  const double k = cfg.inner_tube.curvature();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> angle(0.0, 360.0);
  const double io = cfg.outer_tube.second_moment(), ii = cfg.inner_tube.second_moment();
  const double k_min = k * std::abs(io - ii) / (io + ii);
  for (int i = 0; i < 100; ++i) {
    const double rel = angle(rng);
    const std::array<CurvatureComponent, 2> c{{{io, k, 0.0}, {ii, k, rel}}};
    const double mag = blend_curvature(c).norm();
    CHECK(mag <= k * (1.0 + 1e-12));
    CHECK(mag >= k_min * (1.0 - 1e-12));
  }
}

TEST_CASE("the tip moves no faster than the insertion") {
  const RobotConfig cfg = default_robot_config();
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    JointState q = testing::random_joints(rng, cfg, 90.0 * (i % 4));
    q.inner_translation = std::min(q.inner_translation, cfg.joint_limits.inner_translation_max - 0.5);
    JointState r = q;
    r.inner_translation += 0.5;
    CHECK((tip_frame(cfg, r).origin - tip_frame(cfg, q).origin).norm() <= 0.5 + 1e-12);
  }
}

TEST_CASE("carving never adds material and repeats are no-ops") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> pos(0.0, 20.0), rad(0.3, 3.0);
  VoxelPhantom p = create_phantom({20.0, 20.0, 20.0}, 0.4, Eigen::Vector3d::Zero());
  for (int i = 0; i < 40; ++i) {
    const Eigen::Vector3d a(pos(rng), pos(rng), pos(rng)), b(pos(rng), pos(rng), pos(rng));
    const double r = rad(rng);
    const std::size_t before = p.occupied_count();
    const std::size_t changed = p.carve_capsule(a, b, r);
    CHECK(p.occupied_count() == before - changed);
    CHECK(p.carve_capsule(a, b, r) == 0u);
    CHECK_FALSE(p.occupied_at(0.5 * (a + b)));
  }
}

TEST_CASE("simulated runs respect joint limits and only remove material") {
  const RobotConfig cfg = default_robot_config();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> outer(5.0, 40.0), extra(10.0, 60.0), roll(-180.0, 180.0);
  for (int i = 0; i < 4; ++i) {
    const double o = outer(rng);
    const double r0 = roll(rng);
    const ScenarioScript s = s_shape_script("random", cfg, o, o + extra(rng), r0, r0 + 90.0 * (i % 3));
    const RunRecord rec = testing::run_on_default_phantom(s, cfg, 1.0);
    CHECK_FALSE(rec.faulted);
    const auto& lim = cfg.joint_limits;
    for (const auto& sample : rec.timeline) {
      const JointState& q = sample.joints;
      CHECK(q.outer_translation >= lim.outer_translation_min - 1e-9);
      CHECK(q.outer_translation <= lim.outer_translation_max + 1e-9);
      CHECK(q.inner_translation <= lim.inner_translation_max + 1e-9);
      CHECK(q.inner_translation >= q.outer_translation - 1e-9);
    }
    CHECK(rec.phantom->occupied_count() < default_scenario_phantom(cfg.sheath.pose, 1.0).occupied_count());
  }
}

TEST_CASE("noiseless planar S shapes split at the tube junction") {
  const RobotConfig cfg = default_robot_config();
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> outer(25.0, 40.0), extra(30.0, 60.0), roll(-180.0, 180.0);
  for (int i = 0; i < 20; ++i) {
    const double o = outer(rng), n = extra(rng), r0 = roll(rng);
    const JointState q{o, o + n, r0, r0 + 180.0, 0.0};
    const auto c = forward_kinematics(cfg, q, 0.25).centerline;
    const SCurveSplit split = split_s_curve(c);
    CHECK(split.planar);
    CHECK(std::abs(split.first.arc_length - o) / o < 0.03);
    CHECK(std::abs(split.second.arc_length - n) / n < 0.03);
  }
}

TEST_CASE("planner recovers at least 95 of 100 seeded targets") {
  const RobotConfig cfg = default_robot_config();
  std::mt19937_64 rng(9);
  int hits = 0;
  for (int i = 0; i < 100; ++i) {
    const JointState q = testing::random_joints(rng, cfg, (i % 3) * 90.0);
    PlanRequest req;
    req.target = tip_frame(cfg, q).origin;
    req.total_length = q.inner_translation;
    try {
      hits += plan_s_shape(req, cfg).tip_error < 0.5;
    } catch (const UnreachableError&) {
    }
  }
  CHECK(hits >= 95);
}

TEST_CASE("runs are bit-for-bit repeatable") {
  const RobotConfig cfg = default_robot_config();
  for (const auto& s : builtin_scenarios(cfg)) {
    CAPTURE(s.name);
    CHECK(testing::identical_records(testing::run_on_default_phantom(s, cfg, 1.0),
                                     testing::run_on_default_phantom(s, cfg, 1.0)));
  }
}
