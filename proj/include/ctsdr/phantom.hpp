// Copyright 2026 The ctsdr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ctsdr/kinematics.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ctsdr {

struct GridDims {
  int nx = 0;
  int ny = 0;
  int nz = 0;

  std::size_t count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
  }
  bool operator==(const GridDims&) const = default;
};

inline constexpr std::size_t kDefaultVoxelBudget = 200'000'000;
inline constexpr double kDefaultVoxelSize = 0.2;

/// One bit per voxel, 1 = bone. Linear index i + nx * (j + ny * k); voxel
/// (i, j, k) has its center at origin + (index + 0.5) * voxel_size.
class VoxelPhantom {
 public:
  VoxelPhantom(GridDims dims, double voxel_size, Eigen::Vector3d origin,
               std::string material = "PCF5");

  const GridDims& dims() const { return dims_; }
  double voxel_size() const { return voxel_size_; }
  const Eigen::Vector3d& origin() const { return origin_; }
  const std::string& material() const { return material_; }

  bool occupied(int i, int j, int k) const {
    const std::size_t idx = index(i, j, k);
    return (words_[idx >> 6] >> (idx & 63)) & 1u;
  }
  /// Occupancy of the voxel containing `p`; false outside the grid.
  bool occupied_at(const Eigen::Vector3d& p) const;
  bool inside(const Eigen::Vector3d& p) const;
  /// Trilinear blend of voxel-center occupancy at `p`; cells beyond the grid
  /// count as material.
  double material_fraction(const Eigen::Vector3d& p) const;

  std::size_t occupied_count() const;
  Eigen::Vector3d voxel_center(int i, int j, int k) const;

  /// Clears voxels whose centers lie within `radius` of segment [a, b].
  /// Returns the number of voxels that changed.
  std::size_t carve_capsule(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double radius);
  /// Occupied voxels inside the capsule, stopping early at `limit`.
  std::size_t count_in_capsule(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double radius,
                               std::size_t limit = SIZE_MAX) const;

  void fill();

  /// Packed occupancy, little-endian bit order within each byte.
  std::vector<std::uint8_t> to_bytes() const;
  void assign_bytes(std::span<const std::uint8_t> bytes);

  bool operator==(const VoxelPhantom& other) const;

 private:
  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims_.nx) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims_.ny) * static_cast<std::size_t>(k));
  }
  void clear_bit(std::size_t idx) { words_[idx >> 6] &= ~(std::uint64_t{1} << (idx & 63)); }

  template <typename Visit>
  void for_each_in_capsule(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double radius,
                           Visit&& visit) const;

  GridDims dims_;
  double voxel_size_;
  Eigen::Vector3d origin_;
  std::string material_;
  std::vector<std::uint64_t> words_;
};

/// Fully occupied block; dims = ceil(size / voxel_size).
VoxelPhantom create_phantom(const Eigen::Vector3d& size, double voxel_size,
                            const Eigen::Vector3d& origin,
                            std::size_t voxel_budget = kDefaultVoxelBudget);

/// Block used by the scenario runs: 100 x 60 x 60 mm with its entry face on
/// the sheath mouth plane, centered on the sheath axis.
VoxelPhantom default_scenario_phantom(const Frame& sheath_pose, double voxel_size = kDefaultVoxelSize);

std::size_t carve_swept_sphere(VoxelPhantom& phantom, std::span<const Eigen::Vector3d> path,
                               double cut_radius);
std::size_t carve_swept_sphere(VoxelPhantom& phantom, const Centerline& path, double cut_radius);

struct TunnelSection {
  /// Equal to inscribed_diameter.
  double diameter = 0.0;
  /// Circle with the same area as the section.
  double area_diameter = 0.0;
  /// Diameter of the largest inscribed circle.
  double inscribed_diameter = 0.0;
  /// Area centroid of the section, in world coordinates.
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  /// Empty area of the connected section, mm^2.
  double area = 0.0;
};

/// Cross-section of the carved region nearest `plane_point`. Samples outside
/// the grid count as material. Throws NoTunnel when the window holds no
/// empty sample.
TunnelSection tunnel_cross_section(const VoxelPhantom& phantom, const Eigen::Vector3d& plane_point,
                                   const Eigen::Vector3d& plane_normal, double window_half_width = 12.0);

double tunnel_diameter(const VoxelPhantom& phantom, const Eigen::Vector3d& plane_point,
                       const Eigen::Vector3d& plane_normal);

enum class Axis { X, Y, Z };

Axis parse_axis(std::string_view name);
const char* to_string(Axis axis);

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  std::uint8_t at(int col, int row) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
  bool operator==(const GrayImage&) const = default;
};

/// Orthographic material sum along `axis`, shown as 255 * (1 - fill
/// fraction), so carved tunnels are bright. Image axes: along Z -> (x, y),
/// along Y -> (x, z), along X -> (y, z); column = first, row = second.
GrayImage project(const VoxelPhantom& phantom, Axis axis);

/// Binary PGM (P5, maxval 255).
void write_pgm(std::ostream& os, const GrayImage& image);

/// Raw bitset plus a JSON sidecar (dims, voxel_size, origin, material).
void write_snapshot(const VoxelPhantom& phantom, const std::filesystem::path& bits_path,
                    const std::filesystem::path& sidecar_path);
VoxelPhantom read_snapshot(const std::filesystem::path& bits_path,
                           const std::filesystem::path& sidecar_path);

}  // namespace ctsdr
