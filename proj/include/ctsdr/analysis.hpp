// Copyright 2026 The ctsdr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ctsdr/drill_sim.hpp"
#include "ctsdr/error.hpp"
#include "ctsdr/kinematics.hpp"
#include "ctsdr/phantom.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ctsdr {

struct ArcFit {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 0.0;  // +inf when unbounded
  double arc_length = 0.0;
  double rmse = 0.0;
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  bool unbounded = false;
};

struct PlaneFit {
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double rms = 0.0;
  double max_deviation = 0.0;
};

/// Least-squares plane through >= 3 points.
PlaneFit fit_plane(std::span<const Eigen::Vector3d> points);

/// Algebraic (Kasa) fit refined by Gauss-Newton on the geometric residual.
/// Collinear input yields `unbounded` instead of an error.
ArcFit fit_circle(std::span<const Eigen::Vector2d> points);

/// Plane first, then the circle inside it.
ArcFit fit_arc(std::span<const Eigen::Vector3d> points);

struct SplitOptions {
  int smoothing_window = 5;
  double planar_tolerance = 0.05;   // mm
  double min_run_length = 2.0;      // mm; shorter curvature runs count as transition noise
  double plane_change_deg = 20.0;
  double trim_length = 0.5;         // mm excluded on each side of the split when fitting
};

struct CurveSegment {
  std::vector<Eigen::Vector3d> points;
  double arc_length = 0.0;
};

struct SCurveSplit {
  CurveSegment first;
  CurveSegment second;
  double split_s = 0.0;
  bool planar = true;
  Eigen::Vector3d first_normal = Eigen::Vector3d::UnitZ();
  Eigen::Vector3d second_normal = Eigen::Vector3d::UnitZ();
  /// Angle between the fitted bend planes, folded into [0, 90].
  double plane_angle_deg = 0.0;
};

class SplitError : public Error {
 public:
  SplitError(int inflections, const std::string& message)
      : Error(ErrorCode::Split, message), inflections_(inflections) {}
  int inflections() const noexcept { return inflections_; }

 private:
  int inflections_;
};

/// Splits a two-arc curve at its single inflection: a sign change of the
/// in-plane curvature for planar curves, or a change of bend plane
/// otherwise. Throws SplitError carrying the inflection count when there is
/// not exactly one.
SCurveSplit split_s_curve(const Centerline& centerline, const SplitOptions& options = {});

/// Axis of the carved channel: area centroids of sections taken normal to
/// `guide` every `spacing` mm. Sections within `end_trim` of either end, or
/// with no tunnel, are skipped.
Centerline tunnel_centerline(const VoxelPhantom& phantom, const Centerline& guide, double spacing = 1.0,
                             double end_trim = 4.0, double window_half_width = 8.0);

struct IdealParameters {
  double first_length = 40.7;
  double second_length = 50.0;
  std::optional<double> first_radius;
  double second_radius = 50.0;
};

/// Ideal arcs implied by a final joint state: overlap length, inner-only
/// length and the inner tube's pre-curvature radius.
IdealParameters ideal_from_joints(const RobotConfig& config, const JointState& joints);

struct RunObservation {
  std::string label;
  Centerline locus;
  std::shared_ptr<const VoxelPhantom> phantom;
};

RunObservation observe(const RunRecord& record, std::string label = {});

struct SegmentMeasurement {
  double length = 0.0;
  ArcFit fit;
  std::optional<double> diameter;
};

struct RunMeasurement {
  std::string label;
  SegmentMeasurement first;
  SegmentMeasurement second;
  double split_s = 0.0;
  bool planar = true;
  double plane_angle_deg = 0.0;
};

struct Stat {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n - 1)
  int n = 0;
};

Stat summarize(std::span<const double> values);

/// |measured - ideal| / ideal * 100.
double percent_error(double measured, double ideal);

struct MetricsReport {
  IdealParameters ideal;
  std::vector<RunMeasurement> runs;
  std::vector<std::string> notes;
  Stat first_length, second_length;
  Stat first_radius, second_radius;
  Stat first_diameter, second_diameter;
  Stat plane_angle;
  std::optional<double> first_length_error_pct, second_length_error_pct;
  std::optional<double> first_radius_error_pct, second_radius_error_pct;
  std::optional<double> mean_diameter;
};

RunMeasurement measure_run(const RunObservation& run, const SplitOptions& options = {});

/// Aggregate over runs. Runs that cannot be split are excluded with a
/// note; errors are computed on the means.
MetricsReport metrics_report(std::span<const RunObservation> runs, const IdealParameters& ideal,
                             const SplitOptions& options = {});
MetricsReport metrics_report(std::span<const RunRecord> runs, const IdealParameters& ideal,
                             const SplitOptions& options = {});

/// Aligned plain-text metrics table.
void write_metrics_table(std::ostream& os, const MetricsReport& report);

/// Stiffness ratio rho making two opposed tubes of radius `precurvature_radius`
/// bend the overlap to `observed_combined_radius`:
/// R_obs = R_pre (rho + 1) / (rho - 1).
double calibrate_stiffness_ratio(double observed_combined_radius, double precurvature_radius);

/// runout = (observed - bit) / 2.
double calibrate_runout(double observed_diameter, double bit_diameter);

}  // namespace ctsdr
