// Copyright 2026 The ctsdr Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctsdr/analysis.hpp"
#include "ctsdr/kinematics.hpp"
#include "ctsdr/model.hpp"

#include "doctest.h"
#include "oracle_values.hpp"
#include "support.hpp"

#include <array>
#include <cmath>
#include <random>
#include <sstream>

using namespace ctsdr;

namespace {

const double kIo = oracle::kOuterSecondMoment;
const double kIi = oracle::kInnerSecondMoment;

JointState joints(double outer, double inner, double outer_roll = 0.0, double inner_roll = 0.0) {
  return JointState{outer, inner, outer_roll, inner_roll, 0.0};
}

}  // namespace

TEST_CASE("aligned equal curvatures blend to themselves") {
  const std::array<CurvatureComponent, 2> c{{{1.0, 0.02, 0.0}, {1.0, 0.02, 0.0}}};
  const Eigen::Vector2d k = blend_curvature(c);
  CHECK(k.x() == doctest::Approx(0.02));
  CHECK(k.y() == doctest::Approx(0.0));
}

TEST_CASE("opposed blend gives the reduced curvature") {
  const std::array<CurvatureComponent, 2> c{{{kIo, 0.02, 0.0}, {kIi, 0.02, 180.0}}};
  const Eigen::Vector2d k = blend_curvature(c);
  CHECK(1.0 / k.norm() == doctest::Approx(oracle::kOpposedBlendRadius).epsilon(1e-10));
  CHECK(k.x() > 0.0);
  CHECK(k.norm() == doctest::Approx(0.02 * (oracle::kStiffnessRatio - 1) / (oracle::kStiffnessRatio + 1)));
}

TEST_CASE("right-angle blend magnitude and direction") {
  const std::array<CurvatureComponent, 2> c{{{kIo, 0.02, 0.0}, {kIi, 0.02, 90.0}}};
  const Eigen::Vector2d k = blend_curvature(c);
  CHECK(1.0 / k.norm() == doctest::Approx(oracle::kRightAngleBlendRadius).epsilon(1e-10));
  CHECK(std::atan2(k.y(), k.x()) * 180.0 / M_PI ==
        doctest::Approx(oracle::kRightAngleBlendDirectionDeg).epsilon(1e-10));
}

TEST_CASE("S2 final joints decompose into two segments") {
  const RobotConfig cfg = default_robot_config();
  const SegmentStack s = decompose_segments(cfg, joints(40.7, 90.7, 0.0, 180.0));
  REQUIRE(s.segments.size() == 2);
  CHECK(s.segments[0].length == doctest::Approx(40.7));
  CHECK(s.segments[0].members == (kOuterTube | kInnerTube));
  CHECK(1.0 / s.segments[0].curvature.norm() == doctest::Approx(oracle::kOpposedBlendRadius));
  CHECK(s.segments[1].length == doctest::Approx(50.0));
  CHECK(s.segments[1].members == kInnerTube);
  CHECK(1.0 / s.segments[1].curvature.norm() == doctest::Approx(50.0));
  // Opposite bend directions.
  CHECK(s.segments[0].curvature.dot(s.segments[1].curvature) < 0.0);
  CHECK(s.total_length() == doctest::Approx(90.7));
}

TEST_CASE("zero insertion is an empty stack at the sheath mouth") {
  const RobotConfig cfg = default_robot_config();
  const SegmentStack s = decompose_segments(cfg, joints(0.0, 0.0));
  CHECK(s.segments.empty());
  const Frame tip = tip_frame(cfg, joints(0.0, 0.0));
  CHECK(tip.origin.isApprox(cfg.sheath.pose.origin));
  CHECK(tip.orientation.isApprox(cfg.sheath.pose.orientation));
}

TEST_CASE("flush aligned tubes form one full-curvature segment") {
  const SegmentStack s = decompose_segments(default_robot_config(), joints(20.0, 20.0));
  REQUIRE(s.segments.size() == 1);
  CHECK(s.segments[0].length == doctest::Approx(20.0));
  CHECK(s.segments[0].curvature.norm() == doctest::Approx(0.02));
}

TEST_CASE("inner tip behind outer tip is a contract violation") {
  CHECK_THROWS_AS(decompose_segments(default_robot_config(), joints(30.0, 10.0)), Error);
}

TEST_CASE("single tube arc tip matches the analytic arc") {
  const RobotConfig cfg = default_robot_config();
  const auto r = forward_kinematics(cfg, joints(0.0, 50.0));
  CHECK((r.tip.origin - Eigen::Vector3d(oracle::kSingleArcTipX, oracle::kSingleArcTipY, 0.0)).norm() < 1e-6);
  CHECK(r.tip.tangent().isApprox(Eigen::Vector3d(std::cos(1.0), std::sin(1.0), 0.0), 1e-9));
  CHECK(r.tip.is_orthonormal());
  CHECK(r.centerline.samples.back().position.isApprox(r.tip.origin));
}

TEST_CASE("S2 centerline arc length") {
  const auto r = forward_kinematics(default_robot_config(), joints(40.7, 90.7, 0.0, 180.0));
  CHECK(std::abs(r.centerline.polyline_length() - 90.7) < 0.1);
  CHECK(r.centerline.samples.back().s == doctest::Approx(90.7));
}

TEST_CASE("advance_arc with zero curvature is a straight line") {
  const Frame f = advance_arc(default_sheath_pose(), Eigen::Vector2d::Zero(), 12.5);
  CHECK(f.origin.isApprox(Eigen::Vector3d(12.5, 0.0, 0.0)));
}

TEST_CASE("positive roll turns the bend toward local y") {
  const RobotConfig cfg = default_robot_config();
  const Eigen::Vector3d tip = tip_frame(cfg, joints(0.0, 30.0, 0.0, 90.0)).origin;
  CHECK(tip.z() > 1.0);
  CHECK(std::abs(tip.y()) < 1e-9);
}

TEST_CASE("jacobian at the straight configuration") {
  const RobotConfig cfg = default_robot_config();
  const Jacobian j = numeric_jacobian(cfg, joints(0.0, 0.0));
  CHECK((j.matrix.col(1) - cfg.sheath.pose.tangent()).norm() < 1e-5);
  CHECK(j.matrix.col(2).norm() < 1e-9);
  CHECK(j.matrix.col(3).norm() < 1e-9);
  CHECK(j.one_sided[1]);
}

TEST_CASE("jacobian translation column is the tip tangent on a single arc") {
  const RobotConfig cfg = default_robot_config();
  const Jacobian j = numeric_jacobian(cfg, joints(0.0, 50.0));
  CHECK((j.matrix.col(1) - Eigen::Vector3d(std::cos(1.0), std::sin(1.0), 0.0)).norm() < 1e-6);
}

TEST_CASE("jacobian agrees with a forward difference") {
  const RobotConfig cfg = default_robot_config();
  std::mt19937_64 rng(7);
  for (int n = 0; n < 20; ++n) {
    JointState q = testing::random_joints(rng, cfg, 30.0 * (n % 7));
    q.outer_translation = std::clamp(q.outer_translation, 1.0, 40.0);
    q.inner_translation = std::clamp(q.inner_translation, q.outer_translation + 1.0, 118.0);
    const Jacobian j = numeric_jacobian(cfg, q);
    const Eigen::Vector3d p0 = tip_frame(cfg, q).origin;
    const double h[4] = {1e-3, 1e-3, 1e-2, 1e-2};
    for (int c = 0; c < 4; ++c) {
      JointState qh = q;
      joint_value(qh, static_cast<Dof>(c)) += h[c];
      const Eigen::Vector3d fd = (tip_frame(cfg, qh).origin - p0) / h[c];
      // Forward difference error is O(h) times the second derivative scale.
      CHECK((fd - j.matrix.col(c)).norm() < 0.05 * h[c] * 100.0 + 1e-6);
    }
  }
}

TEST_CASE("planar rolls keep the centerline in one plane") {
  const RobotConfig cfg = default_robot_config();
  for (double inner_roll : {0.0, 180.0}) {
    const auto c = forward_kinematics(cfg, joints(30.0, 85.0, 0.0, inner_roll)).centerline;
    double worst = 0.0;
    for (const auto& s : c.samples) worst = std::max(worst, std::abs(s.position.z()));
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("relative roll 90 tilts the overlap plane by the blend angle") {
  // Static shape: the overlap bends at atan(I_i/I_o) from the outer plane,
  // the inner-only arc at 90 degrees, so the planes meet at 90 - 16.28.
  const RobotConfig cfg = default_robot_config();
  const auto c = forward_kinematics(cfg, joints(30.0, 80.0, 0.0, 90.0), 0.05).centerline;
  std::vector<Eigen::Vector3d> first, second;
  for (const auto& s : c.samples) {
    if (s.s <= 30.0) first.push_back(s.position);
    if (s.s >= 30.0) second.push_back(s.position);
  }
  const PlaneFit a = fit_plane(first), b = fit_plane(second);
  const double angle = std::acos(std::min(1.0, std::abs(a.normal.dot(b.normal)))) * 180.0 / M_PI;
  CHECK(angle == doctest::Approx(90.0 - oracle::kRightAngleBlendDirectionDeg).epsilon(1e-6));
}

TEST_CASE("centerline csv round trip") {
  const auto c = forward_kinematics(default_robot_config(), joints(20.0, 60.0, 10.0, 200.0)).centerline;
  std::stringstream ss;
  write_centerline_csv(ss, c);
  const Centerline back = read_centerline_csv(ss);
  REQUIRE(back.size() == c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK((back.samples[i].position - c.samples[i].position).norm() < 1e-8);
    CHECK(back.samples[i].s == doctest::Approx(c.samples[i].s));
  }
  std::stringstream bad("s_mm,x_mm,y_mm,z_mm,tx,ty,tz\n1,2,three,4,0,0,1\n");
  CHECK_THROWS_AS(read_centerline_csv(bad), Error);
  std::stringstream wrong_header("a,b,c\n");
  CHECK_THROWS_AS(read_centerline_csv(wrong_header), Error);
}
