// Copyright 2026 The ctsdr Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctsdr/kinematics.hpp"

#include "ctsdr/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <istream>
#include <ostream>
#include <string>
#include <sstream>

namespace ctsdr {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kLengthEps = 1e-12;

struct Exposure {
  const TubeSpec* tube;
  double exposed;
  double roll_deg;
  double stiffness;
  unsigned member;

  // Pre-curvature at arc position s from the sheath mouth.
  double curvature_at(double s) const {
    const double from_tip = exposed - s;
    return from_tip <= tube->curved_length() + kLengthEps ? tube->curvature() : 0.0;
  }
};

}  // namespace

double SegmentStack::total_length() const {
  double total = 0.0;
  for (const auto& seg : segments) total += seg.length;
  return total;
}

double Centerline::polyline_length() const {
  double total = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    total += (samples[i].position - samples[i - 1].position).norm();
  }
  return total;
}

std::vector<Eigen::Vector3d> Centerline::points() const {
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(samples.size());
  for (const auto& s : samples) pts.push_back(s.position);
  return pts;
}

Eigen::Vector2d blend_curvature(std::span<const CurvatureComponent> components) {
  if (components.empty()) {
    throw Error(ErrorCode::InvalidArgument, "blend_curvature needs at least one component");
  }
  Eigen::Vector2d weighted = Eigen::Vector2d::Zero();
  double total = 0.0;
  for (const auto& c : components) {
    if (!(c.bending_stiffness > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "blend_curvature stiffness must be positive");
    }
    const double a = c.roll_deg * kDeg;
    weighted += c.bending_stiffness * c.precurvature * Eigen::Vector2d(std::cos(a), std::sin(a));
    total += c.bending_stiffness;
  }
  return weighted / total;
}

SegmentStack decompose_segments(const RobotConfig& config, const JointState& joints) {
  const double outer_exposed = std::max(0.0, joints.outer_translation);
  const double inner_exposed = std::max(0.0, joints.inner_translation);
  if (inner_exposed + 1e-9 < outer_exposed) {
    std::ostringstream msg;
    msg << "inner tip (" << inner_exposed << " mm) behind outer tip (" << outer_exposed << " mm)";
    throw Error(ErrorCode::ContractViolation, msg.str());
  }

  // Only the ratio enters the blend, so the inner stiffness can stand in as
  // the unit when a calibrated ratio is configured.
  const double inner_ei = config.inner_tube.bending_stiffness();
  const double outer_ei = config.effective_stiffness_ratio
                              ? *config.effective_stiffness_ratio * inner_ei
                              : config.outer_tube.bending_stiffness();

  const std::array<Exposure, 2> tubes{{
      {&config.outer_tube, outer_exposed, joints.outer_roll, outer_ei, kOuterTube},
      {&config.inner_tube, inner_exposed, joints.inner_roll, inner_ei, kInnerTube},
  }};

  std::vector<double> breaks{0.0, outer_exposed, inner_exposed};
  for (const auto& t : tubes) {
    const double straight_part = t.exposed - t.tube->curved_length();
    if (straight_part > 0.0) breaks.push_back(straight_part);
  }
  std::sort(breaks.begin(), breaks.end());

  SegmentStack stack;
  stack.base = config.sheath.pose;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i];
    const double b = std::min(breaks[i + 1], inner_exposed);
    if (b - a <= kLengthEps) continue;
    const double mid = 0.5 * (a + b);

    std::array<CurvatureComponent, 2> comps;
    std::size_t n = 0;
    unsigned members = 0;
    for (const auto& t : tubes) {
      if (mid > t.exposed) continue;
      comps[n++] = {t.stiffness, t.curvature_at(mid), t.roll_deg};
      members |= t.member;
    }
    Segment seg;
    seg.length = b - a;
    seg.curvature = blend_curvature(std::span<const CurvatureComponent>(comps.data(), n));
    seg.members = members;

    // Merge with the previous piece when nothing changed across the break.
    if (!stack.segments.empty() && stack.segments.back().members == members &&
        (stack.segments.back().curvature - seg.curvature).norm() == 0.0) {
      stack.segments.back().length += seg.length;
    } else {
      stack.segments.push_back(seg);
    }
  }
  return stack;
}

Frame advance_arc(const Frame& start, const Eigen::Vector2d& curvature, double length) {
  Frame out;
  const double k = curvature.norm();
  if (k == 0.0) {
    out.origin = start.origin + start.orientation * Eigen::Vector3d(0.0, 0.0, length);
    out.orientation = start.orientation;
    return out;
  }
  const double angle = k * length;
  const Eigen::Vector2d dir = curvature / k;
  // (1 - cos a) / k written as 2 sin^2(a/2) / k to stay accurate for small a.
  const double along = std::sin(angle) / k;
  const double half = std::sin(0.5 * angle);
  const double lateral = 2.0 * half * half / k;
  const Eigen::Vector3d local(lateral * dir.x(), lateral * dir.y(), along);
  const Eigen::Vector3d axis(-dir.y(), dir.x(), 0.0);
  out.origin = start.origin + start.orientation * local;
  out.orientation = start.orientation * Eigen::AngleAxisd(angle, axis).toRotationMatrix();
  return out;
}

Frame tip_frame(const SegmentStack& stack) {
  Frame f = stack.base;
  for (const auto& seg : stack.segments) f = advance_arc(f, seg.curvature, seg.length);
  return f;
}

Frame tip_frame(const RobotConfig& config, const JointState& joints) {
  return tip_frame(decompose_segments(config, joints));
}

KinematicsResult forward_kinematics(const RobotConfig& config, const JointState& joints,
                                    double sample_step) {
  if (!(sample_step > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "sample_step must be positive");
  }
  const SegmentStack stack = decompose_segments(config, joints);

  KinematicsResult result;
  auto& samples = result.centerline.samples;
  result.centerline.sample_step = sample_step;

  Frame f = stack.base;
  double s = 0.0;
  samples.push_back({s, f.origin, f.tangent()});
  for (const auto& seg : stack.segments) {
    const auto pieces = static_cast<std::size_t>(std::ceil(seg.length / sample_step - 1e-9));
    const std::size_t n = std::max<std::size_t>(1, pieces);
    for (std::size_t i = 1; i <= n; ++i) {
      const double ds = seg.length * static_cast<double>(i) / static_cast<double>(n);
      const Frame g = advance_arc(f, seg.curvature, ds);
      samples.push_back({s + ds, g.origin, g.tangent()});
    }
    f = advance_arc(f, seg.curvature, seg.length);
    s += seg.length;
    // Pin the segment end to the exact composed frame.
    samples.back().position = f.origin;
    samples.back().tangent = f.tangent();
  }
  result.tip = f;
  return result;
}

namespace {

struct DofBounds {
  double lo;
  double hi;
};

DofBounds dof_bounds(const RobotConfig& config, const JointState& q, int dof) {
  const auto& lim = config.joint_limits;
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (dof) {
    case 0:
      return {lim.outer_translation_min, std::min(lim.outer_translation_max, q.inner_translation)};
    case 1:
      return {std::max(lim.inner_translation_min, q.outer_translation), lim.inner_translation_max};
    default:
      return {-inf, inf};
  }
}

double& dof_ref(JointState& q, int dof) {
  switch (dof) {
    case 0: return q.outer_translation;
    case 1: return q.inner_translation;
    case 2: return q.outer_roll;
    default: return q.inner_roll;
  }
}

}  // namespace

Jacobian numeric_jacobian(const RobotConfig& config, const JointState& joints,
                          const JacobianSteps& steps) {
  Jacobian jac;
  for (int dof = 0; dof < 4; ++dof) {
    const double h = dof < 2 ? steps.translation : steps.roll;
    const DofBounds b = dof_bounds(config, joints, dof);
    JointState plus = joints;
    JointState minus = joints;
    const double x = dof_ref(plus, dof);
    const bool can_plus = x + h <= b.hi + 1e-12;
    const bool can_minus = x - h >= b.lo - 1e-12;

    double denom = 2.0 * h;
    if (can_plus && can_minus) {
      dof_ref(plus, dof) = x + h;
      dof_ref(minus, dof) = x - h;
    } else if (can_plus) {
      dof_ref(plus, dof) = x + h;
      denom = h;
      jac.one_sided[dof] = true;
    } else if (can_minus) {
      dof_ref(minus, dof) = x - h;
      denom = h;
      jac.one_sided[dof] = true;
    } else {
      // Joint pinned from both sides (e.g. outer == inner at the outer max).
      jac.one_sided[dof] = true;
      continue;
    }
    const Eigen::Vector3d p = tip_frame(config, plus).origin;
    const Eigen::Vector3d m = tip_frame(config, minus).origin;
    jac.matrix.col(dof) = (p - m) / denom;
  }
  return jac;
}

void write_centerline_csv(std::ostream& os, const Centerline& centerline) {
  os << "s_mm,x_mm,y_mm,z_mm,tx,ty,tz\n";
  os << std::setprecision(10);
  for (const auto& s : centerline.samples) {
    os << s.s << ',' << s.position.x() << ',' << s.position.y() << ',' << s.position.z() << ','
       << s.tangent.x() << ',' << s.tangent.y() << ',' << s.tangent.z() << '\n';
  }
}

Centerline read_centerline_csv(std::istream& is) {
  Centerline c;
  std::string line;
  if (!std::getline(is, line) || line.rfind("s_mm,x_mm,y_mm,z_mm", 0) != 0) {
    throw Error(ErrorCode::MalformedConfig, "centerline CSV: missing header");
  }
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::array<double, 7> v{};
    char comma = ',';
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i > 0 && (!(fields >> comma) || comma != ',')) fields.setstate(std::ios::failbit);
      fields >> v[i];
    }
    if (!fields) throw Error(ErrorCode::MalformedConfig, "centerline CSV: bad row " + std::to_string(row));
    CenterlineSample sample{v[0], Eigen::Vector3d(v[1], v[2], v[3]), Eigen::Vector3d(v[4], v[5], v[6])};
    if (!c.samples.empty()) c.sample_step = std::max(c.sample_step, (sample.position - c.samples.back().position).norm());
    c.samples.push_back(sample);
  }
  return c;
}

}  // namespace ctsdr
