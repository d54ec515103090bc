// Copyright 2026 The ctsdr Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctsdr/planner.hpp"

#include "ctsdr/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ctsdr {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double wrap180(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w <= -180.0) w += 360.0;
  if (w > 180.0) w -= 360.0;
  return w;
}

// Inclusive range lo..hi in steps, always ending on hi.
std::vector<double> grid_values(double lo, double hi, double step) {
  std::vector<double> out;
  if (hi < lo) return out;
  const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
  for (int i = 0; i <= n; ++i) out.push_back(lo + i * step);
  if (hi - out.back() > 1e-9) out.push_back(hi);
  return out;
}

bool ranks_before(const RankedCandidate& a, const RankedCandidate& b) {
  if (a.cost != b.cost) return a.cost < b.cost;
  if (a.candidate.inner_length != b.candidate.inner_length) return a.candidate.inner_length < b.candidate.inner_length;
  return std::abs(wrap180(a.candidate.relative_roll)) < std::abs(wrap180(b.candidate.relative_roll));
}

struct Bounds {
  double outer_min, outer_max, inner_min, inner_max;
};

Bounds bounds_of(const RobotConfig& config) {
  const auto& lim = config.joint_limits;
  return {lim.outer_translation_min, lim.outer_translation_max, lim.inner_translation_min,
          lim.inner_translation_max};
}

void project(PlanCandidate& c, const Bounds& b, const PlanRequest& request) {
  c.outer_length = std::clamp(c.outer_length, b.outer_min, std::min(b.outer_max, b.inner_max));
  c.inner_length = std::clamp(c.inner_length, std::max(b.inner_min, c.outer_length), b.inner_max);
  if (c.precurvature_radius) {
    c.precurvature_radius = std::clamp(*c.precurvature_radius, request.curvature.min_radius,
                                       request.curvature.max_radius);
  }
}

Eigen::Vector3d to_local(const Frame& base, const Eigen::Vector3d& p) {
  return base.orientation.transpose() * (p - base.origin);
}

// Outer roll that turns the tip computed at zero outer roll onto the
// target's azimuth about the sheath axis.
double solve_outer_roll(const Frame& base, const Eigen::Vector3d& tip_at_zero, const Eigen::Vector3d& target) {
  const Eigen::Vector3d l = to_local(base, tip_at_zero);
  const Eigen::Vector3d t = to_local(base, target);
  if (std::hypot(l.x(), l.y()) < 1e-12 || std::hypot(t.x(), t.y()) < 1e-12) return 0.0;
  return wrap180((std::atan2(t.y(), t.x()) - std::atan2(l.y(), l.x())) / kDeg);
}

class Refiner {
 public:
  Refiner(const PlanRequest& request, const RobotConfig& config)
      : request_(request), config_(config), bounds_(bounds_of(config)) {}

  RankedCandidate run(const RankedCandidate& start) {
    RankedCandidate best = start;
    gauss_newton(best);
    coordinate_descent(best);
    return best;
  }

 private:
  // Continuous variables: outer length, inner length, outer roll, then the
  // relative roll and radius when those are searched.
  std::vector<double> pack(const PlanCandidate& c) const {
    std::vector<double> x{c.outer_length, c.inner_length, c.outer_roll};
    if (request_.continuous_roll) x.push_back(c.relative_roll);
    if (c.precurvature_radius) x.push_back(*c.precurvature_radius);
    return x;
  }

  PlanCandidate unpack(const std::vector<double>& x, const PlanCandidate& like) const {
    PlanCandidate c = like;
    c.outer_length = x[0];
    c.inner_length = x[1];
    c.outer_roll = x[2];
    std::size_t i = 3;
    if (request_.continuous_roll) c.relative_roll = x[i++];
    if (c.precurvature_radius) c.precurvature_radius = x[i++];
    project(c, bounds_, request_);
    return c;
  }

  bool try_accept(RankedCandidate& best, const PlanCandidate& c) const {
    const RankedCandidate r = evaluate_candidate(c, request_, config_);
    if (r.cost < best.cost) {
      best = r;
      return true;
    }
    return false;
  }

  void gauss_newton(RankedCandidate& best) const {
    const double sw_tip = std::sqrt(request_.weights.tip);
    const double sw_len = std::sqrt(request_.weights.length);
    double lambda = 1e-3;
    for (int iter = 0; iter < 40 && best.cost > 0.0; ++iter) {
      const PlanCandidate& c = best.candidate;
      const RobotConfig cfg = candidate_config(config_, c);
      const JointState q = c.joints();
      const Jacobian jac = numeric_jacobian(cfg, q);
      const std::size_t n = pack(c).size();
      Eigen::MatrixXd J = Eigen::MatrixXd::Zero(4, static_cast<Eigen::Index>(n));
      J.block<3, 1>(0, 0) = sw_tip * jac.matrix.col(0);
      J.block<3, 1>(0, 1) = sw_tip * jac.matrix.col(1);
      J.block<3, 1>(0, 2) = sw_tip * (jac.matrix.col(2) + jac.matrix.col(3));
      J(3, 1) = sw_len;
      Eigen::Index col = 3;
      if (request_.continuous_roll) J.block<3, 1>(0, col++) = sw_tip * jac.matrix.col(3);
      if (c.precurvature_radius) {
        PlanCandidate shifted = c;
        const double h = 1e-4 * *c.precurvature_radius;
        shifted.precurvature_radius = *c.precurvature_radius + h;
        const Eigen::Vector3d up = tip_frame(candidate_config(config_, shifted), q).origin;
        shifted.precurvature_radius = *c.precurvature_radius - h;
        const Eigen::Vector3d down = tip_frame(candidate_config(config_, shifted), q).origin;
        J.block<3, 1>(0, col++) = sw_tip * (up - down) / (2.0 * h);
      }
      Eigen::Vector4d r;
      r.head<3>() = sw_tip * (best.tip - request_.target);
      r(3) = sw_len * (c.inner_length - request_.total_length);

      const Eigen::MatrixXd JtJ = J.transpose() * J;
      const Eigen::VectorXd g = J.transpose() * r;
      bool improved = false;
      for (int attempt = 0; attempt < 8 && !improved; ++attempt) {
        Eigen::MatrixXd H = JtJ;
        for (Eigen::Index d = 0; d < H.rows(); ++d) H(d, d) += lambda * std::max(JtJ(d, d), 1e-9);
        const Eigen::VectorXd delta = H.ldlt().solve(-g);
        if (!delta.allFinite()) break;
        std::vector<double> x = pack(c);
        for (std::size_t d = 0; d < n; ++d) x[d] += delta(static_cast<Eigen::Index>(d));
        improved = try_accept(best, unpack(x, c));
        lambda = improved ? std::max(lambda * 0.3, 1e-9) : lambda * 10.0;
      }
      if (!improved) break;
    }
  }

  void coordinate_descent(RankedCandidate& best) const {
    std::vector<double> step{request_.translation_step / 2, request_.translation_step / 2, 5.0};
    if (request_.continuous_roll) step.push_back(request_.roll_step / 2);
    if (best.candidate.precurvature_radius) step.push_back(request_.curvature.step / 2);
    const double tol = request_.refine_tolerance;
    while (*std::max_element(step.begin(), step.end()) >= tol) {
      for (std::size_t d = 0; d < step.size(); ++d) {
        if (step[d] < tol) continue;
        bool moved = false;
        for (double sign : {1.0, -1.0}) {
          std::vector<double> x = pack(best.candidate);
          x[d] += sign * step[d];
          if (try_accept(best, unpack(x, best.candidate))) {
            moved = true;
            break;
          }
        }
        if (!moved) step[d] *= 0.5;
      }
    }
  }

  const PlanRequest& request_;
  const RobotConfig& config_;
  Bounds bounds_;
};

}  // namespace

JointState PlanCandidate::joints() const {
  JointState q;
  q.outer_translation = outer_length;
  q.inner_translation = inner_length;
  q.outer_roll = outer_roll;
  q.inner_roll = outer_roll + relative_roll;
  return q;
}

RobotConfig candidate_config(const RobotConfig& config, const PlanCandidate& candidate) {
  if (!candidate.precurvature_radius) return config;
  RobotConfig cfg = config;
  cfg.outer_tube.precurvature_radius = *candidate.precurvature_radius;
  cfg.inner_tube.precurvature_radius = *candidate.precurvature_radius;
  return cfg;
}

RankedCandidate evaluate_candidate(const PlanCandidate& candidate, const PlanRequest& request,
                                   const RobotConfig& config) {
  RankedCandidate r;
  r.candidate = candidate;
  r.tip = tip_frame(candidate_config(config, candidate), candidate.joints()).origin;
  r.tip_error = (r.tip - request.target).norm();
  r.length_error = candidate.inner_length - request.total_length;
  r.cost = request.weights.tip * r.tip_error * r.tip_error + request.weights.length * r.length_error * r.length_error;
  return r;
}

double plan_cost(const PlanCandidate& candidate, const PlanRequest& request, const RobotConfig& config) {
  return evaluate_candidate(candidate, request, config).cost;
}

PlanResult plan_s_shape(const PlanRequest& request, const RobotConfig& config) {
  if (!request.target.allFinite()) throw Error(ErrorCode::InvalidArgument, "plan target must be finite");
  if (!(request.translation_step > 0.0) || !(request.roll_step > 0.0) || !(request.refine_tolerance > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "plan grid steps must be positive");
  }
  if (request.weights.tip < 0.0 || request.weights.length < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "plan weights must be non-negative");
  }
  if (request.curvature.enabled &&
      !(request.curvature.min_radius > 0.0 && request.curvature.max_radius >= request.curvature.min_radius &&
        request.curvature.step > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "curvature search bounds are invalid");
  }
  if (!request.continuous_roll && request.allowed_relative_rolls.empty()) {
    throw Error(ErrorCode::InvalidArgument, "no relative rolls allowed");
  }
  const ValidationReport report = validate_config(config);
  if (!report.valid()) throw Error(ErrorCode::MalformedConfig, report.violations.front().message);

  std::vector<double> rolls = request.continuous_roll ? grid_values(-180.0 + request.roll_step, 180.0, request.roll_step)
                                                      : request.allowed_relative_rolls;
  std::vector<std::optional<double>> radii{std::nullopt};
  if (request.curvature.enabled) {
    radii.clear();
    for (double r : grid_values(request.curvature.min_radius, request.curvature.max_radius, request.curvature.step)) {
      radii.emplace_back(r);
    }
  }

  const Bounds b = bounds_of(config);
  const Frame& base = config.sheath.pose;
  std::vector<RankedCandidate> grid;
  for (const auto& radius : radii) {
    for (double lo : grid_values(b.outer_min, std::min(b.outer_max, b.inner_max), request.translation_step)) {
      for (double li : grid_values(std::max(lo, b.inner_min), b.inner_max, request.translation_step)) {
        for (double theta : rolls) {
          PlanCandidate c{lo, li, 0.0, theta, radius};
          const Eigen::Vector3d tip0 = tip_frame(candidate_config(config, c), c.joints()).origin;
          c.outer_roll = solve_outer_roll(base, tip0, request.target);
          grid.push_back(evaluate_candidate(c, request, config));
        }
      }
    }
  }
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "joint limits leave no grid points");
  std::sort(grid.begin(), grid.end(), ranks_before);

  const std::size_t k = std::min<std::size_t>(grid.size(), static_cast<std::size_t>(std::max(1, request.top_k)));
  Refiner refiner(request, config);
  std::vector<RankedCandidate> ranking;
  for (std::size_t i = 0; i < k; ++i) ranking.push_back(refiner.run(grid[i]));
  std::stable_sort(ranking.begin(), ranking.end(), ranks_before);

  for (auto& r : ranking) {
    r.candidate.outer_roll = wrap180(r.candidate.outer_roll);
    r.candidate.relative_roll = wrap180(r.candidate.relative_roll);
    if (!request.continuous_roll && r.candidate.relative_roll == -180.0) r.candidate.relative_roll = 180.0;
  }
  const RankedCandidate& top = ranking.front();
  if (top.tip_error > request.max_tip_error) {
    std::ostringstream msg;
    msg << "unreachable target: best tip error " << top.tip_error << " mm exceeds " << request.max_tip_error << " mm";
    throw UnreachableError(msg.str(), top);
  }

  PlanResult result;
  result.best = top.candidate;
  result.joints = top.candidate.joints();
  result.joints.inner_roll = wrap180(result.joints.inner_roll);
  if (result.joints.inner_roll == -180.0) result.joints.inner_roll = 180.0;
  result.predicted_tip = top.tip;
  result.tip_error = top.tip_error;
  result.length_error = top.length_error;
  result.cost = top.cost;
  result.grid_cost = grid.front().cost;
  result.ranking = ranking;
  result.script = s_shape_script("plan", candidate_config(config, top.candidate), top.candidate.outer_length,
                                 top.candidate.inner_length, result.joints.outer_roll, result.joints.inner_roll);
  return result;
}

}  // namespace ctsdr
