// Copyright 2026 The ctsdr Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctsdr/phantom.hpp"

#include "ctsdr/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

namespace ctsdr {

namespace {

int clamp_index(double v, int n) {
  if (v < 0.0) return 0;
  if (v > static_cast<double>(n - 1)) return n - 1;
  return static_cast<int>(v);
}

// Squared distance from p to segment [a, b].
double segment_distance2(const Eigen::Vector3d& p, const Eigen::Vector3d& a, const Eigen::Vector3d& ab,
                         double ab2) {
  Eigen::Vector3d ap = p - a;
  if (ab2 > 0.0) {
    const double t = std::clamp(ap.dot(ab) / ab2, 0.0, 1.0);
    ap -= t * ab;
  }
  return ap.squaredNorm();
}

}  // namespace

VoxelPhantom::VoxelPhantom(GridDims dims, double voxel_size, Eigen::Vector3d origin, std::string material)
    : dims_(dims), voxel_size_(voxel_size), origin_(std::move(origin)), material_(std::move(material)) {
  if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0) {
    throw Error(ErrorCode::InvalidArgument, "phantom dims must be positive");
  }
  if (!(voxel_size > 0.0)) throw Error(ErrorCode::InvalidArgument, "voxel_size must be positive");
  words_.assign((dims.count() + 63) / 64, 0);
  fill();
}

void VoxelPhantom::fill() {
  std::fill(words_.begin(), words_.end(), ~std::uint64_t{0});
  const std::size_t tail = dims_.count() & 63;
  if (tail != 0) words_.back() = (std::uint64_t{1} << tail) - 1;
}

bool VoxelPhantom::inside(const Eigen::Vector3d& p) const {
  const Eigen::Vector3d g = (p - origin_) / voxel_size_;
  return g.x() >= 0.0 && g.y() >= 0.0 && g.z() >= 0.0 && g.x() < dims_.nx && g.y() < dims_.ny &&
         g.z() < dims_.nz;
}

bool VoxelPhantom::occupied_at(const Eigen::Vector3d& p) const {
  if (!inside(p)) return false;
  const Eigen::Vector3d g = (p - origin_) / voxel_size_;
  return occupied(static_cast<int>(g.x()), static_cast<int>(g.y()), static_cast<int>(g.z()));
}

double VoxelPhantom::material_fraction(const Eigen::Vector3d& p) const {
  const Eigen::Vector3d g = (p - origin_) / voxel_size_ - Eigen::Vector3d::Constant(0.5);
  const int i0 = static_cast<int>(std::floor(g.x()));
  const int j0 = static_cast<int>(std::floor(g.y()));
  const int k0 = static_cast<int>(std::floor(g.z()));
  const double fx = g.x() - i0, fy = g.y() - j0, fz = g.z() - k0;
  auto occ = [&](int i, int j, int k) -> double {
    if (i < 0 || j < 0 || k < 0 || i >= dims_.nx || j >= dims_.ny || k >= dims_.nz) return 1.0;
    return occupied(i, j, k) ? 1.0 : 0.0;
  };
  double sum = 0.0;
  for (int c = 0; c < 8; ++c) {
    const int di = c & 1, dj = (c >> 1) & 1, dk = (c >> 2) & 1;
    const double w = (di ? fx : 1.0 - fx) * (dj ? fy : 1.0 - fy) * (dk ? fz : 1.0 - fz);
    if (w > 0.0) sum += w * occ(i0 + di, j0 + dj, k0 + dk);
  }
  return sum;
}

std::size_t VoxelPhantom::occupied_count() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

Eigen::Vector3d VoxelPhantom::voxel_center(int i, int j, int k) const {
  return origin_ + voxel_size_ * Eigen::Vector3d(i + 0.5, j + 0.5, k + 0.5);
}

template <typename Visit>
void VoxelPhantom::for_each_in_capsule(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double radius,
                                       Visit&& visit) const {
  const Eigen::Vector3d lo = a.cwiseMin(b).array() - radius;
  const Eigen::Vector3d hi = a.cwiseMax(b).array() + radius;
  const Eigen::Vector3d glo = (lo - origin_) / voxel_size_ - Eigen::Vector3d::Constant(0.5);
  const Eigen::Vector3d ghi = (hi - origin_) / voxel_size_ - Eigen::Vector3d::Constant(0.5);
  if (ghi.x() < 0.0 || ghi.y() < 0.0 || ghi.z() < 0.0 || glo.x() > dims_.nx - 1 ||
      glo.y() > dims_.ny - 1 || glo.z() > dims_.nz - 1) {
    return;
  }
  const int i0 = clamp_index(std::ceil(glo.x()), dims_.nx), i1 = clamp_index(std::floor(ghi.x()), dims_.nx);
  const int j0 = clamp_index(std::ceil(glo.y()), dims_.ny), j1 = clamp_index(std::floor(ghi.y()), dims_.ny);
  const int k0 = clamp_index(std::ceil(glo.z()), dims_.nz), k1 = clamp_index(std::floor(ghi.z()), dims_.nz);

  const Eigen::Vector3d ab = b - a;
  const double ab2 = ab.squaredNorm();
  const double r2 = radius * radius;
  for (int k = k0; k <= k1; ++k) {
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) {
        const std::size_t idx = index(i, j, k);
        if (!((words_[idx >> 6] >> (idx & 63)) & 1u)) continue;
        if (segment_distance2(voxel_center(i, j, k), a, ab, ab2) <= r2) {
          if (!visit(idx)) return;
        }
      }
    }
  }
}

std::size_t VoxelPhantom::carve_capsule(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double radius) {
  std::vector<std::size_t> hits;
  for_each_in_capsule(a, b, radius, [&](std::size_t idx) {
    hits.push_back(idx);
    return true;
  });
  for (auto idx : hits) clear_bit(idx);
  return hits.size();
}

std::size_t VoxelPhantom::count_in_capsule(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double radius,
                                           std::size_t limit) const {
  std::size_t n = 0;
  for_each_in_capsule(a, b, radius, [&](std::size_t) { return ++n < limit; });
  return n;
}

std::vector<std::uint8_t> VoxelPhantom::to_bytes() const {
  std::vector<std::uint8_t> out((dims_.count() + 7) / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(words_[i >> 3] >> (8 * (i & 7)));
  }
  return out;
}

void VoxelPhantom::assign_bytes(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != (dims_.count() + 7) / 8) {
    throw Error(ErrorCode::Io, "phantom bitset size does not match dims");
  }
  std::fill(words_.begin(), words_.end(), 0);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    words_[i >> 3] |= std::uint64_t{bytes[i]} << (8 * (i & 7));
  }
  const std::size_t tail = dims_.count() & 63;
  if (tail != 0) words_.back() &= (std::uint64_t{1} << tail) - 1;
}

bool VoxelPhantom::operator==(const VoxelPhantom& other) const {
  return dims_ == other.dims_ && voxel_size_ == other.voxel_size_ && origin_ == other.origin_ &&
         words_ == other.words_;
}

VoxelPhantom create_phantom(const Eigen::Vector3d& size, double voxel_size, const Eigen::Vector3d& origin,
                            std::size_t voxel_budget) {
  if (!(voxel_size > 0.0)) throw Error(ErrorCode::InvalidArgument, "voxel_size must be positive");
  if (!(size.minCoeff() > 0.0)) throw Error(ErrorCode::InvalidArgument, "phantom size must be positive");
  // Tolerate representation error so 100 / 0.2 stays 500.
  auto cells = [&](double extent) { return std::ceil(extent / voxel_size - 1e-9); };
  const double nx = cells(size.x()), ny = cells(size.y()), nz = cells(size.z());
  const double total = nx * ny * nz;
  if (total > static_cast<double>(voxel_budget)) {
    std::ostringstream msg;
    msg << "phantom needs " << total << " voxels, budget is " << voxel_budget;
    throw Error(ErrorCode::Budget, msg.str());
  }
  return VoxelPhantom(GridDims{static_cast<int>(nx), static_cast<int>(ny), static_cast<int>(nz)}, voxel_size,
                      origin);
}

VoxelPhantom default_scenario_phantom(const Frame& sheath_pose, double voxel_size) {
  // Block in sheath-local coordinates: x, y in [-30, 30], z (tangent) in [0, 100].
  const Eigen::Vector3d local_lo(-30.0, -30.0, 0.0);
  const Eigen::Vector3d local_hi(30.0, 30.0, 100.0);
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector3d hi = -lo;
  for (int c = 0; c < 8; ++c) {
    const Eigen::Vector3d corner((c & 1) ? local_hi.x() : local_lo.x(), (c & 2) ? local_hi.y() : local_lo.y(),
                                 (c & 4) ? local_hi.z() : local_lo.z());
    const Eigen::Vector3d w = sheath_pose.origin + sheath_pose.orientation * corner;
    lo = lo.cwiseMin(w);
    hi = hi.cwiseMax(w);
  }
  return create_phantom(hi - lo, voxel_size, lo);
}

std::size_t carve_swept_sphere(VoxelPhantom& phantom, std::span<const Eigen::Vector3d> path, double cut_radius) {
  if (!(cut_radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "cut_radius must be positive");
  if (path.empty()) throw Error(ErrorCode::InvalidArgument, "carve path is empty");
  if (path.size() == 1) return phantom.carve_capsule(path[0], path[0], cut_radius);
  std::size_t carved = 0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) carved += phantom.carve_capsule(path[i], path[i + 1], cut_radius);
  return carved;
}

std::size_t carve_swept_sphere(VoxelPhantom& phantom, const Centerline& path, double cut_radius) {
  const auto pts = path.points();
  return carve_swept_sphere(phantom, std::span<const Eigen::Vector3d>(pts), cut_radius);
}

TunnelSection tunnel_cross_section(const VoxelPhantom& phantom, const Eigen::Vector3d& plane_point,
                                   const Eigen::Vector3d& plane_normal, double window_half_width) {
  if (!(plane_normal.norm() > 0.0)) throw Error(ErrorCode::InvalidArgument, "plane normal is zero");
  const Eigen::Vector3d n = plane_normal.normalized();
  const Eigen::Vector3d u = n.unitOrthogonal();
  const Eigen::Vector3d v = n.cross(u);

  const double h = 0.5 * phantom.voxel_size();
  const int half = static_cast<int>(std::ceil(window_half_width / h));
  // One padding ring of material around the window.
  const int side = 2 * half + 3;
  auto at = [side](int a, int b) { return static_cast<std::size_t>(b) * side + a; };
  auto world = [&](int a, int b) {
    return Eigen::Vector3d(plane_point + (a - half - 1) * h * u + (b - half - 1) * h * v);
  };

  std::vector<std::uint8_t> empty(static_cast<std::size_t>(side) * side, 0);
  int seed_a = -1, seed_b = -1;
  double seed_d2 = std::numeric_limits<double>::infinity();
  for (int b = 1; b < side - 1; ++b) {
    for (int a = 1; a < side - 1; ++a) {
      const Eigen::Vector3d p = world(a, b);
      if (phantom.inside(p) && phantom.material_fraction(p) < 0.5) {
        empty[at(a, b)] = 1;
        const double d2 = double(a - half - 1) * (a - half - 1) + double(b - half - 1) * (b - half - 1);
        if (d2 < seed_d2) {
          seed_d2 = d2;
          seed_a = a;
          seed_b = b;
        }
      }
    }
  }
  if (seed_a < 0) throw Error(ErrorCode::NoTunnel, "no empty region in the section plane");

  // Flood the component holding the seed.
  std::vector<std::uint8_t> comp(empty.size(), 0);
  std::deque<std::pair<int, int>> queue{{seed_a, seed_b}};
  comp[at(seed_a, seed_b)] = 1;
  std::vector<std::pair<int, int>> members;
  while (!queue.empty()) {
    const auto [a, b] = queue.front();
    queue.pop_front();
    members.emplace_back(a, b);
    constexpr int da[4] = {1, -1, 0, 0}, db[4] = {0, 0, 1, -1};
    for (int d = 0; d < 4; ++d) {
      const int na = a + da[d], nb = b + db[d];
      const std::size_t idx = at(na, nb);
      if (empty[idx] && !comp[idx]) {
        comp[idx] = 1;
        queue.emplace_back(na, nb);
      }
    }
  }

  std::vector<std::pair<int, int>> boundary;
  for (const auto& [a, b] : members) {
    constexpr int da[4] = {1, -1, 0, 0}, db[4] = {0, 0, 1, -1};
    for (int d = 0; d < 4; ++d) {
      const int na = a + da[d], nb = b + db[d];
      if (!comp[at(na, nb)]) boundary.emplace_back(na, nb);
    }
  }
  std::sort(boundary.begin(), boundary.end());
  boundary.erase(std::unique(boundary.begin(), boundary.end()), boundary.end());

  double best = -1.0;
  for (const auto& [a, b] : members) {
    double d2min = std::numeric_limits<double>::infinity();
    for (const auto& [ba, bb] : boundary) {
      const double d2 = double(a - ba) * (a - ba) + double(b - bb) * (b - bb);
      if (d2 < d2min) {
        d2min = d2;
        if (d2min <= best * best) break;
      }
    }
    const double d = std::sqrt(d2min);
    best = std::max(best, d);
  }

  TunnelSection section;
  section.area = static_cast<double>(members.size()) * h * h;
  section.area_diameter = 2.0 * std::sqrt(section.area / std::numbers::pi);
  // The empty/solid interface sits half a sample before the first solid one.
  section.inscribed_diameter = 2.0 * (best * h - 0.5 * h);
  section.diameter = section.inscribed_diameter;
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& [a, b] : members) centroid += world(a, b);
  section.center = centroid / static_cast<double>(members.size());
  return section;
}

double tunnel_diameter(const VoxelPhantom& phantom, const Eigen::Vector3d& plane_point,
                       const Eigen::Vector3d& plane_normal) {
  return tunnel_cross_section(phantom, plane_point, plane_normal).diameter;
}

Axis parse_axis(std::string_view name) {
  if (name == "x" || name == "X") return Axis::X;
  if (name == "y" || name == "Y") return Axis::Y;
  if (name == "z" || name == "Z") return Axis::Z;
  throw Error(ErrorCode::InvalidArgument, "axis must be x, y or z");
}

const char* to_string(Axis axis) {
  switch (axis) {
    case Axis::X: return "x";
    case Axis::Y: return "y";
    case Axis::Z: return "z";
  }
  return "?";
}

GrayImage project(const VoxelPhantom& phantom, Axis axis) {
  const auto& d = phantom.dims();
  GrayImage img;
  int depth = 0;
  switch (axis) {
    case Axis::Z: img.width = d.nx; img.height = d.ny; depth = d.nz; break;
    case Axis::Y: img.width = d.nx; img.height = d.nz; depth = d.ny; break;
    case Axis::X: img.width = d.ny; img.height = d.nz; depth = d.nx; break;
  }
  std::vector<std::uint32_t> sums(static_cast<std::size_t>(img.width) * img.height, 0);
  for (int k = 0; k < d.nz; ++k) {
    for (int j = 0; j < d.ny; ++j) {
      for (int i = 0; i < d.nx; ++i) {
        if (!phantom.occupied(i, j, k)) continue;
        switch (axis) {
          case Axis::Z: ++sums[static_cast<std::size_t>(j) * img.width + i]; break;
          case Axis::Y: ++sums[static_cast<std::size_t>(k) * img.width + i]; break;
          case Axis::X: ++sums[static_cast<std::size_t>(k) * img.width + j]; break;
        }
      }
    }
  }
  img.pixels.resize(sums.size());
  for (std::size_t p = 0; p < sums.size(); ++p) {
    const double empty_fraction = 1.0 - static_cast<double>(sums[p]) / depth;
    img.pixels[p] = static_cast<std::uint8_t>(std::lround(255.0 * empty_fraction));
  }
  return img;
}

void write_pgm(std::ostream& os, const GrayImage& image) {
  os << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
}

void write_snapshot(const VoxelPhantom& phantom, const std::filesystem::path& bits_path,
                    const std::filesystem::path& sidecar_path) {
  const auto bytes = phantom.to_bytes();
  std::ofstream bits(bits_path, std::ios::binary);
  if (!bits) throw Error(ErrorCode::Io, "cannot write " + bits_path.string());
  bits.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));

  nlohmann::json j;
  j["dims"] = {phantom.dims().nx, phantom.dims().ny, phantom.dims().nz};
  j["voxel_size"] = phantom.voxel_size();
  j["origin"] = {phantom.origin().x(), phantom.origin().y(), phantom.origin().z()};
  j["material"] = phantom.material();
  j["layout"] = "x-fastest, 1 bit per voxel, LSB first, 1 = material";
  std::ofstream side(sidecar_path);
  if (!side) throw Error(ErrorCode::Io, "cannot write " + sidecar_path.string());
  side << j.dump(2) << '\n';
  if (!bits || !side) throw Error(ErrorCode::Io, "snapshot write failed");
}

VoxelPhantom read_snapshot(const std::filesystem::path& bits_path, const std::filesystem::path& sidecar_path) {
  std::ifstream side(sidecar_path);
  if (!side) throw Error(ErrorCode::Io, "cannot read " + sidecar_path.string());
  nlohmann::json j;
  try {
    side >> j;
    const GridDims dims{j.at("dims").at(0).get<int>(), j.at("dims").at(1).get<int>(),
                        j.at("dims").at(2).get<int>()};
    const Eigen::Vector3d origin(j.at("origin").at(0).get<double>(), j.at("origin").at(1).get<double>(),
                                 j.at("origin").at(2).get<double>());
    VoxelPhantom phantom(dims, j.at("voxel_size").get<double>(), origin, j.value("material", "PCF5"));
    std::ifstream bits(bits_path, std::ios::binary);
    if (!bits) throw Error(ErrorCode::Io, "cannot read " + bits_path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(bits)), std::istreambuf_iterator<char>());
    phantom.assign_bytes(bytes);
    return phantom;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Io, std::string("malformed phantom sidecar: ") + e.what());
  }
}

}  // namespace ctsdr
