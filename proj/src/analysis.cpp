// Copyright 2026 The ctsdr Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctsdr/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

namespace ctsdr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

double polyline_length(std::span<const Eigen::Vector3d> pts) {
  double total = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) total += (pts[i] - pts[i - 1]).norm();
  return total;
}

// Angular extent covered by points around a center: 2 pi minus the widest gap.
double angular_span(std::span<const Eigen::Vector2d> pts, const Eigen::Vector2d& center) {
  std::vector<double> angles;
  angles.reserve(pts.size());
  for (const auto& p : pts) angles.push_back(std::atan2(p.y() - center.y(), p.x() - center.x()));
  std::sort(angles.begin(), angles.end());
  double widest = angles.front() + 2.0 * kPi - angles.back();
  for (std::size_t i = 1; i < angles.size(); ++i) widest = std::max(widest, angles[i] - angles[i - 1]);
  return 2.0 * kPi - widest;
}

}  // namespace

PlaneFit fit_plane(std::span<const Eigen::Vector3d> points) {
  if (points.size() < 3) throw Error(ErrorCode::InvalidArgument, "plane fit needs at least 3 points");
  PlaneFit fit;
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (const auto& p : points) c += p;
  c /= static_cast<double>(points.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : points) cov += (p - c) * (p - c).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  fit.centroid = c;
  fit.normal = eig.eigenvectors().col(0).normalized();
  double sum2 = 0.0;
  for (const auto& p : points) {
    const double d = (p - c).dot(fit.normal);
    sum2 += d * d;
    fit.max_deviation = std::max(fit.max_deviation, std::abs(d));
  }
  fit.rms = std::sqrt(sum2 / static_cast<double>(points.size()));
  return fit;
}

ArcFit fit_circle(std::span<const Eigen::Vector2d> points) {
  const auto n = points.size();
  if (n < 3) throw Error(ErrorCode::InvalidArgument, "circle fit needs at least 3 points");

  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (const auto& p : points) c += p;
  c /= static_cast<double>(n);
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& p : points) cov += (p - c) * (p - c).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
  const double spread = std::sqrt(std::max(eig.eigenvalues()(1), 0.0) / static_cast<double>(n));

  ArcFit fit;
  auto mark_unbounded = [&]() {
    fit.unbounded = true;
    fit.radius = kInf;
    fit.center = Eigen::Vector3d::Zero();
    const Eigen::Vector2d axis = eig.eigenvectors().col(1);
    double lo = kInf, hi = -kInf, sum2 = 0.0;
    for (const auto& p : points) {
      const double along = (p - c).dot(axis);
      lo = std::min(lo, along);
      hi = std::max(hi, along);
      const double off = (p - c).dot(eig.eigenvectors().col(0));
      sum2 += off * off;
    }
    fit.arc_length = hi - lo;
    fit.rmse = std::sqrt(sum2 / static_cast<double>(n));
    return fit;
  };
  if (spread == 0.0 || std::sqrt(std::max(eig.eigenvalues()(0), 0.0)) <= 1e-9 * std::sqrt(eig.eigenvalues()(1))) {
    return mark_unbounded();
  }

  // Kasa on centered, scaled coordinates: x^2 + y^2 = 2 a x + 2 b y + c.
  Eigen::MatrixXd A(n, 3);
  Eigen::VectorXd rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d q = (points[i] - c) / spread;
    A(static_cast<Eigen::Index>(i), 0) = 2.0 * q.x();
    A(static_cast<Eigen::Index>(i), 1) = 2.0 * q.y();
    A(static_cast<Eigen::Index>(i), 2) = 1.0;
    rhs(static_cast<Eigen::Index>(i)) = q.squaredNorm();
  }
  const Eigen::Vector3d kasa = A.colPivHouseholderQr().solve(rhs);
  Eigen::Vector2d center(kasa(0), kasa(1));
  double radius = std::sqrt(std::max(kasa(2) + center.squaredNorm(), 0.0));
  if (!std::isfinite(radius) || radius > 1e8) return mark_unbounded();

  // Levenberg-Marquardt on r_i = |q_i - center| - radius.
  auto cost_of = [&](const Eigen::Vector2d& ctr, double r) {
    double s = 0.0;
    for (const auto& p : points) {
      const double e = ((p - c) / spread - ctr).norm() - r;
      s += e * e;
    }
    return s;
  };
  double cost = cost_of(center, radius);
  double lambda = 1e-6;
  for (int iter = 0; iter < 200; ++iter) {
    Eigen::Matrix3d JtJ = Eigen::Matrix3d::Zero();
    Eigen::Vector3d Jte = Eigen::Vector3d::Zero();
    for (const auto& p : points) {
      const Eigen::Vector2d d = (p - c) / spread - center;
      const double dist = d.norm();
      if (dist == 0.0) continue;
      const Eigen::Vector3d J(-d.x() / dist, -d.y() / dist, -1.0);
      const double e = dist - radius;
      JtJ += J * J.transpose();
      Jte += J * e;
    }
    Eigen::Matrix3d H = JtJ;
    H.diagonal() *= (1.0 + lambda);
    const Eigen::Vector3d delta = H.ldlt().solve(-Jte);
    const Eigen::Vector2d c2 = center + delta.head<2>();
    const double r2 = radius + delta(2);
    const double cost2 = cost_of(c2, r2);
    // Near the optimum the cost is flat to rounding, so steps within that
    // band are accepted and convergence is judged on the step size.
    if (cost2 <= cost * (1.0 + 1e-12)) {
      center = c2;
      radius = r2;
      const bool done = delta.norm() <= 1e-14 * std::max(1.0, std::abs(radius));
      cost = cost2;
      lambda = std::max(lambda * 0.1, 1e-12);
      if (done) break;
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
  }
  if (!std::isfinite(radius) || radius > 1e8) return mark_unbounded();

  const Eigen::Vector2d world_center = c + spread * center;
  fit.center = Eigen::Vector3d(world_center.x(), world_center.y(), 0.0);
  fit.radius = spread * std::abs(radius);
  fit.rmse = spread * std::sqrt(cost / static_cast<double>(n));
  fit.arc_length = fit.radius * angular_span(points, world_center);
  fit.normal = Eigen::Vector3d::UnitZ();
  return fit;
}

ArcFit fit_arc(std::span<const Eigen::Vector3d> points) {
  const PlaneFit plane = fit_plane(points);
  const Eigen::Vector3d u = plane.normal.unitOrthogonal();
  const Eigen::Vector3d v = plane.normal.cross(u);
  std::vector<Eigen::Vector2d> flat;
  flat.reserve(points.size());
  for (const auto& p : points) {
    const Eigen::Vector3d d = p - plane.centroid;
    flat.emplace_back(d.dot(u), d.dot(v));
  }
  ArcFit fit = fit_circle(flat);
  fit.normal = plane.normal;
  if (!fit.unbounded) fit.center = plane.centroid + fit.center.x() * u + fit.center.y() * v;
  if (!fit.unbounded) {
    // Out-of-plane residual joins the in-plane one.
    fit.rmse = std::sqrt(fit.rmse * fit.rmse + plane.rms * plane.rms);
  }
  return fit;
}

namespace {

struct Run {
  int sign = 0;               // planar mode
  Eigen::Vector3d axis;       // bend-plane mode
  std::size_t begin = 0, end = 0;  // inclusive sample indices
  double length = 0.0;
};

double fit_cost(std::span<const Eigen::Vector3d> pts) {
  if (pts.size() < 3) return 0.0;
  const ArcFit f = fit_arc(pts);
  return f.rmse * f.rmse * static_cast<double>(pts.size());
}

std::span<const Eigen::Vector3d> trimmed(const std::vector<Eigen::Vector3d>& pts, double trim, bool at_end) {
  // Drop up to `trim` mm at the split side while keeping at least 3 points.
  std::size_t drop = 0;
  double acc = 0.0;
  const std::size_t n = pts.size();
  while (drop + 3 < n) {
    const std::size_t a = at_end ? n - 1 - drop : drop;
    const std::size_t b = at_end ? a - 1 : a + 1;
    acc += (pts[a] - pts[b]).norm();
    if (acc > trim) break;
    ++drop;
  }
  if (at_end) return {pts.data(), n - drop};
  return {pts.data() + drop, n - drop};
}

}  // namespace

SCurveSplit split_s_curve(const Centerline& centerline, const SplitOptions& options) {
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(centerline.size());
  for (const auto& s : centerline.samples) {
    if (pts.empty() || (s.position - pts.back()).norm() > 1e-9) pts.push_back(s.position);
  }
  const std::size_t n = pts.size();
  if (n < 7) throw SplitError(0, "centerline too short to split");

  std::vector<double> s(n, 0.0), chord(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    chord[i] = (pts[i + 1] - pts[i]).norm();
    s[i + 1] = s[i] + chord[i];
  }
  std::vector<double> sorted_chords = chord;
  std::nth_element(sorted_chords.begin(), sorted_chords.begin() + sorted_chords.size() / 2, sorted_chords.end());
  const double median_chord = sorted_chords[sorted_chords.size() / 2];
  auto is_break = [&](std::size_t i) { return chord[i] > 10.0 * median_chord && chord[i] > 0.1; };

  const PlaneFit global = fit_plane(pts);
  const bool planar = global.max_deviation <= options.planar_tolerance;

  // Discrete curvature vectors; invalid next to breaks and at the ends.
  std::vector<Eigen::Vector3d> kappa(n, Eigen::Vector3d::Zero()), tangent(n, Eigen::Vector3d::Zero());
  std::vector<bool> valid(n, false);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (is_break(i - 1) || is_break(i)) continue;
    const Eigen::Vector3d ta = (pts[i] - pts[i - 1]) / chord[i - 1];
    const Eigen::Vector3d tb = (pts[i + 1] - pts[i]) / chord[i];
    kappa[i] = (tb - ta) / (0.5 * (chord[i - 1] + chord[i]));
    tangent[i] = (ta + tb).normalized();
    valid[i] = true;
  }
  const int half = std::max(0, options.smoothing_window / 2);
  std::vector<Eigen::Vector3d> smooth(n, Eigen::Vector3d::Zero());
  for (std::size_t i = 0; i < n; ++i) {
    if (!valid[i]) continue;
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
    int count = 0;
    for (int d = -half; d <= half; ++d) {
      const auto j = static_cast<std::ptrdiff_t>(i) + d;
      if (j < 0 || j >= static_cast<std::ptrdiff_t>(n) || !valid[static_cast<std::size_t>(j)]) continue;
      acc += kappa[static_cast<std::size_t>(j)];
      ++count;
    }
    smooth[i] = acc / count;
  }

  std::vector<double> magnitudes;
  for (std::size_t i = 0; i < n; ++i) {
    if (valid[i]) magnitudes.push_back(smooth[i].norm());
  }
  if (magnitudes.empty()) throw SplitError(0, "no inflection: curve has no usable curvature samples");
  std::nth_element(magnitudes.begin(), magnitudes.begin() + magnitudes.size() / 2, magnitudes.end());
  const double threshold = 0.05 * magnitudes[magnitudes.size() / 2];
  const double same_plane = std::cos(options.plane_change_deg * kPi / 180.0);

  std::vector<Run> runs;
  for (std::size_t i = 0; i < n; ++i) {
    if (!valid[i] || smooth[i].norm() <= threshold || threshold == 0.0) continue;
    if (planar) {
      const double signed_k = smooth[i].dot(global.normal.cross(tangent[i]));
      const int sign = signed_k > 0.0 ? 1 : -1;
      if (!runs.empty() && runs.back().sign == sign) {
        runs.back().end = i;
      } else {
        runs.push_back({sign, Eigen::Vector3d::Zero(), i, i, 0.0});
      }
    } else {
      const Eigen::Vector3d b = tangent[i].cross(smooth[i]).normalized();
      if (!runs.empty() && std::abs(runs.back().axis.dot(b)) >= same_plane) {
        runs.back().end = i;
      } else {
        runs.push_back({0, b, i, i, 0.0});
      }
    }
  }
  for (auto& r : runs) r.length = s[r.end] - s[r.begin];
  std::erase_if(runs, [&](const Run& r) { return r.length < options.min_run_length; });
  std::vector<Run> merged;
  for (const auto& r : runs) {
    const bool same = !merged.empty() && (planar ? merged.back().sign == r.sign
                                                 : std::abs(merged.back().axis.dot(r.axis)) >= same_plane);
    if (same) {
      merged.back().end = r.end;
    } else {
      merged.push_back(r);
    }
  }
  const int inflections = std::max(0, static_cast<int>(merged.size()) - 1);
  if (inflections != 1) {
    std::ostringstream msg;
    if (inflections == 0) {
      msg << "no inflection found";
    } else {
      msg << inflections << " inflections found, expected exactly one";
    }
    throw SplitError(inflections, msg.str());
  }

  const std::size_t lo = merged[0].end;
  const std::size_t hi = merged[1].begin;
  SCurveSplit result;
  result.planar = planar;

  std::optional<std::size_t> break_at;
  for (std::size_t i = lo > 0 ? lo - 1 : 0; i <= hi && i + 1 < n; ++i) {
    if (is_break(i) && (!break_at || chord[i] > chord[*break_at])) break_at = i;
  }
  if (break_at) {
    result.first.points.assign(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(*break_at) + 1);
    result.second.points.assign(pts.begin() + static_cast<std::ptrdiff_t>(*break_at) + 1, pts.end());
    result.split_s = s[*break_at];
  } else {
    // The junction minimises the combined two-arc residual.
    const std::size_t a = lo > static_cast<std::size_t>(half + 2) ? lo - half - 2 : 2;
    const std::size_t b = std::min(n - 3, hi + half + 2);
    const std::size_t stride = std::max<std::size_t>(1, (b - a) / 400);
    std::size_t best_k = lo;
    double best_cost = kInf;
    auto consider = [&](std::size_t k) {
      if (k < 2 || k > n - 3) return;
      const double cost = fit_cost({pts.data(), k + 1}) + fit_cost({pts.data() + k, n - k});
      if (cost < best_cost) {
        best_cost = cost;
        best_k = k;
      }
    };
    for (std::size_t k = a; k <= b; k += stride) consider(k);
    if (stride > 1) {
      const std::size_t c = best_k;
      for (std::size_t k = c > stride ? c - stride : 0; k <= c + stride; ++k) consider(k);
    }
    result.first.points.assign(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(best_k) + 1);
    result.second.points.assign(pts.begin() + static_cast<std::ptrdiff_t>(best_k), pts.end());
    result.split_s = s[best_k];
  }
  result.first.arc_length = polyline_length(result.first.points);
  result.second.arc_length = polyline_length(result.second.points);

  if (result.first.points.size() < 3 || result.second.points.size() < 3) {
    throw SplitError(1, "inflection too close to the curve ends");
  }
  const auto fa = trimmed(result.first.points, options.trim_length, true);
  const auto fb = trimmed(result.second.points, options.trim_length, false);
  result.first_normal = fit_plane(fa).normal;
  result.second_normal = fit_plane(fb).normal;
  const double c = std::clamp(std::abs(result.first_normal.dot(result.second_normal)), 0.0, 1.0);
  result.plane_angle_deg = std::acos(c) * 180.0 / kPi;
  return result;
}

Centerline tunnel_centerline(const VoxelPhantom& phantom, const Centerline& guide, double spacing,
                             double end_trim, double window_half_width) {
  if (!(spacing > 0.0)) throw Error(ErrorCode::InvalidArgument, "spacing must be positive");
  Centerline out;
  out.sample_step = spacing;
  if (guide.size() < 2) return out;
  const double s0 = guide.samples.front().s, s1 = guide.samples.back().s;
  std::size_t k = 0;
  for (double s = s0 + end_trim; s <= s1 - end_trim + 1e-9; s += spacing) {
    while (k + 2 < guide.size() && guide.samples[k + 1].s < s) ++k;
    const auto& a = guide.samples[k];
    const auto& b = guide.samples[k + 1];
    const double span = b.s - a.s;
    const double w = span > 0.0 ? std::clamp((s - a.s) / span, 0.0, 1.0) : 0.0;
    const Eigen::Vector3d p = (1.0 - w) * a.position + w * b.position;
    Eigen::Vector3d t = (1.0 - w) * a.tangent + w * b.tangent;
    if (t.norm() == 0.0) t = b.position - a.position;
    try {
      const TunnelSection sec = tunnel_cross_section(phantom, p, t.normalized(), window_half_width);
      CenterlineSample sample;
      sample.s = s;
      sample.position = sec.center;
      sample.tangent = t.normalized();
      out.samples.push_back(sample);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoTunnel) throw;
    }
  }
  return out;
}

IdealParameters ideal_from_joints(const RobotConfig& config, const JointState& joints) {
  IdealParameters ideal;
  ideal.first_length = joints.outer_translation;
  ideal.second_length = joints.inner_translation - joints.outer_translation;
  ideal.first_radius.reset();
  ideal.second_radius = config.inner_tube.precurvature_radius;
  return ideal;
}

RunObservation observe(const RunRecord& record, std::string label) {
  return RunObservation{label.empty() ? record.scenario : std::move(label), record.tip_locus, record.phantom};
}

Stat summarize(std::span<const double> values) {
  Stat st;
  st.n = static_cast<int>(values.size());
  if (values.empty()) return st;
  double sum = 0.0;
  for (double v : values) sum += v;
  st.mean = sum / st.n;
  if (st.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - st.mean) * (v - st.mean);
    st.stddev = std::sqrt(ss / (st.n - 1));
  }
  return st;
}

double percent_error(double measured, double ideal) {
  if (ideal == 0.0) throw Error(ErrorCode::InvalidArgument, "percent error against a zero ideal");
  return std::abs(measured - ideal) / std::abs(ideal) * 100.0;
}

namespace {

SegmentMeasurement measure_segment(const CurveSegment& seg, std::span<const Eigen::Vector3d> fit_points,
                                   const VoxelPhantom* phantom) {
  SegmentMeasurement m;
  m.length = seg.arc_length;
  m.fit = fit_arc(fit_points);
  if (phantom != nullptr && seg.points.size() >= 3) {
    // Section at the arc-length midpoint, normal to the local chord.
    double acc = 0.0;
    std::size_t mid = 1;
    for (; mid + 1 < seg.points.size(); ++mid) {
      acc += (seg.points[mid] - seg.points[mid - 1]).norm();
      if (acc >= 0.5 * seg.arc_length) break;
    }
    const std::size_t a = mid - 1, b = std::min(mid + 1, seg.points.size() - 1);
    try {
      m.diameter = tunnel_diameter(*phantom, seg.points[mid], seg.points[b] - seg.points[a]);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoTunnel) throw;
    }
  }
  return m;
}

}  // namespace

RunMeasurement measure_run(const RunObservation& run, const SplitOptions& options) {
  const SCurveSplit split = split_s_curve(run.locus, options);
  RunMeasurement m;
  m.label = run.label;
  m.split_s = split.split_s;
  m.planar = split.planar;
  m.plane_angle_deg = split.plane_angle_deg;
  m.first = measure_segment(split.first, trimmed(split.first.points, options.trim_length, true), run.phantom.get());
  m.second =
      measure_segment(split.second, trimmed(split.second.points, options.trim_length, false), run.phantom.get());
  return m;
}

MetricsReport metrics_report(std::span<const RunObservation> runs, const IdealParameters& ideal,
                             const SplitOptions& options) {
  if (runs.empty()) throw Error(ErrorCode::InvalidArgument, "metrics_report needs at least one run");
  MetricsReport report;
  report.ideal = ideal;
  for (const auto& run : runs) {
    try {
      report.runs.push_back(measure_run(run, options));
    } catch (const SplitError& e) {
      report.notes.push_back("excluded run '" + run.label + "': " + e.what());
    }
  }

  std::vector<double> l1, l2, r1, r2, d1, d2, angles;
  for (const auto& m : report.runs) {
    l1.push_back(m.first.length);
    l2.push_back(m.second.length);
    if (!m.first.fit.unbounded) r1.push_back(m.first.fit.radius);
    if (!m.second.fit.unbounded) r2.push_back(m.second.fit.radius);
    if (m.first.diameter) d1.push_back(*m.first.diameter);
    if (m.second.diameter) d2.push_back(*m.second.diameter);
    angles.push_back(m.plane_angle_deg);
  }
  report.first_length = summarize(l1);
  report.second_length = summarize(l2);
  report.first_radius = summarize(r1);
  report.second_radius = summarize(r2);
  report.first_diameter = summarize(d1);
  report.second_diameter = summarize(d2);
  report.plane_angle = summarize(angles);

  if (report.first_length.n > 0 && ideal.first_length > 0.0) {
    report.first_length_error_pct = percent_error(report.first_length.mean, ideal.first_length);
  }
  if (report.second_length.n > 0 && ideal.second_length > 0.0) {
    report.second_length_error_pct = percent_error(report.second_length.mean, ideal.second_length);
  }
  if (report.first_radius.n > 0 && ideal.first_radius) {
    report.first_radius_error_pct = percent_error(report.first_radius.mean, *ideal.first_radius);
  }
  if (report.second_radius.n > 0 && std::isfinite(ideal.second_radius)) {
    report.second_radius_error_pct = percent_error(report.second_radius.mean, ideal.second_radius);
  }
  if (report.first_diameter.n > 0 && report.second_diameter.n > 0) {
    report.mean_diameter = 0.5 * (report.first_diameter.mean + report.second_diameter.mean);
  }
  return report;
}

MetricsReport metrics_report(std::span<const RunRecord> runs, const IdealParameters& ideal,
                             const SplitOptions& options) {
  std::vector<RunObservation> obs;
  obs.reserve(runs.size());
  for (std::size_t i = 0; i < runs.size(); ++i) {
    obs.push_back(observe(runs[i], runs[i].scenario + "#" + std::to_string(i + 1)));
  }
  return metrics_report(std::span<const RunObservation>(obs), ideal, options);
}

namespace {

std::string fmt_num(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

std::string fmt_stat(const Stat& st) {
  if (st.n == 0) return "N/A";
  if (st.n == 1) return fmt_num(st.mean);
  return fmt_num(st.mean) + " +/- " + fmt_num(st.stddev);
}

std::string fmt_pct(const std::optional<double>& v) { return v ? fmt_num(*v) + "%" : "N/A"; }

}  // namespace

void write_metrics_table(std::ostream& os, const MetricsReport& r) {
  const auto& ideal = r.ideal;
  const std::vector<std::array<std::string, 3>> rows = {
      {"Tube", "Inner+Outer (mm)", "Inner (mm)"},
      {"Ideal Insertion Length", fmt_num(ideal.first_length), fmt_num(ideal.second_length)},
      {"Measured Insertion Length", fmt_stat(r.first_length), fmt_stat(r.second_length)},
      {"Insertion Length Error", fmt_pct(r.first_length_error_pct), fmt_pct(r.second_length_error_pct)},
      {"Ideal Radius of Curvature", ideal.first_radius ? fmt_num(*ideal.first_radius) : "N/A",
       std::isfinite(ideal.second_radius) ? fmt_num(ideal.second_radius) : "N/A"},
      {"Measured Radius of Curvature", fmt_stat(r.first_radius), fmt_stat(r.second_radius)},
      {"Radius of Curvature Error", fmt_pct(r.first_radius_error_pct), fmt_pct(r.second_radius_error_pct)},
      {"Drilled Diameter", r.first_diameter.n ? fmt_num(r.first_diameter.mean) : "N/A",
       r.second_diameter.n ? fmt_num(r.second_diameter.mean) : "N/A"},
  };
  std::size_t w0 = 0, w1 = 0;
  for (const auto& row : rows) {
    w0 = std::max(w0, row[0].size());
    w1 = std::max(w1, row[1].size());
  }
  for (const auto& row : rows) {
    os << std::left << std::setw(static_cast<int>(w0 + 2)) << row[0] << std::setw(static_cast<int>(w1 + 2))
       << row[1] << row[2] << '\n';
  }
  os << "Runs: " << r.runs.size();
  if (r.mean_diameter) os << "   Mean drilled diameter: " << fmt_num(*r.mean_diameter) << " mm";
  os << '\n';
  for (const auto& note : r.notes) os << "Note: " << note << '\n';
}

double calibrate_stiffness_ratio(double observed_combined_radius, double precurvature_radius) {
  if (!(precurvature_radius > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "precurvature radius must be positive");
  }
  if (!(observed_combined_radius > precurvature_radius)) {
    throw Error(ErrorCode::Infeasible,
                "opposed tubes cannot bend tighter than their pre-curvature; observed radius must exceed it");
  }
  return (observed_combined_radius + precurvature_radius) / (observed_combined_radius - precurvature_radius);
}

double calibrate_runout(double observed_diameter, double bit_diameter) {
  if (!(bit_diameter > 0.0)) throw Error(ErrorCode::InvalidArgument, "bit diameter must be positive");
  if (observed_diameter < bit_diameter) {
    throw Error(ErrorCode::Infeasible, "observed diameter below bit diameter implies negative runout");
  }
  return 0.5 * (observed_diameter - bit_diameter);
}

}  // namespace ctsdr
