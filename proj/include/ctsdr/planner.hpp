// Copyright 2026 The ctsdr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ctsdr/drill_sim.hpp"
#include "ctsdr/error.hpp"
#include "ctsdr/model.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace ctsdr {

struct CurvatureSearch {
  bool enabled = false;
  double min_radius = 30.0;  // mm
  double max_radius = 150.0;
  double step = 10.0;
};

struct PlanWeights {
  double tip = 1.0;     // per mm^2
  double length = 1.0;  // per mm^2
};

struct PlanRequest {
  Eigen::Vector3d target = Eigen::Vector3d::Zero();
  double total_length = 90.0;
  /// Relative rolls (deg) the grid may use. Ignored when `continuous_roll`.
  std::vector<double> allowed_relative_rolls{0.0, 90.0, 180.0};
  bool continuous_roll = false;
  CurvatureSearch curvature;
  PlanWeights weights;
  double translation_step = 2.0;  // mm
  double roll_step = 15.0;        // deg, continuous mode grid
  double refine_tolerance = 1e-3;
  int top_k = 5;
  /// Best tip error above this means the target is unreachable.
  double max_tip_error = 1.0;
};

/// One point of the search space. The outer roll sets the bend azimuth; the
/// relative roll sets the S-shape.
struct PlanCandidate {
  double outer_length = 0.0;
  double inner_length = 0.0;
  double outer_roll = 0.0;
  double relative_roll = 0.0;
  std::optional<double> precurvature_radius;

  JointState joints() const;
};

struct RankedCandidate {
  PlanCandidate candidate;
  Eigen::Vector3d tip = Eigen::Vector3d::Zero();
  double tip_error = 0.0;
  double length_error = 0.0;
  double cost = 0.0;
};

struct PlanResult {
  PlanCandidate best;
  JointState joints;
  Eigen::Vector3d predicted_tip = Eigen::Vector3d::Zero();
  double tip_error = 0.0;
  double length_error = 0.0;
  double cost = 0.0;
  /// Cost of the best grid point before refinement.
  double grid_cost = 0.0;
  std::vector<RankedCandidate> ranking;
  ScenarioScript script;
};

class UnreachableError : public Error {
 public:
  UnreachableError(const std::string& message, RankedCandidate best)
      : Error(ErrorCode::Unreachable, message), best_(std::move(best)) {}
  const RankedCandidate& best() const noexcept { return best_; }

 private:
  RankedCandidate best_;
};

/// Config with the candidate's pre-curvature applied to both tubes.
RobotConfig candidate_config(const RobotConfig& config, const PlanCandidate& candidate);

/// w_tip |tip - target|^2 + w_len (inner_length - total_length)^2.
double plan_cost(const PlanCandidate& candidate, const PlanRequest& request, const RobotConfig& config);
RankedCandidate evaluate_candidate(const PlanCandidate& candidate, const PlanRequest& request,
                                   const RobotConfig& config);

/// Grid search over (outer length, inner length, relative roll) with the
/// outer roll solved in closed form, then local refinement of the best
/// candidates. Throws UnreachableError when the best tip error exceeds
/// `request.max_tip_error`.
PlanResult plan_s_shape(const PlanRequest& request, const RobotConfig& config);

}  // namespace ctsdr
