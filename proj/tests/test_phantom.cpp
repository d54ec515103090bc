// Copyright 2026 The ctsdr Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctsdr/error.hpp"
#include "ctsdr/phantom.hpp"

#include "doctest.h"
#include "oracle_values.hpp"

#include <algorithm>
#include <filesystem>
#include <random>
#include <sstream>
#include <vector>

using namespace ctsdr;
using Eigen::Vector3d;

namespace {

// 30 x 20 x 20 block with x in [0, 30], centered on the x axis.
VoxelPhantom block(double voxel) { return create_phantom({30.0, 20.0, 20.0}, voxel, {0.0, -10.0, -10.0}); }

double cleared_volume(const VoxelPhantom& before_full, const VoxelPhantom& after) {
  const double v = after.voxel_size();
  return static_cast<double>(before_full.occupied_count() - after.occupied_count()) * v * v * v;
}

}  // namespace

TEST_CASE("construction") {
  const VoxelPhantom p = create_phantom({100.0, 60.0, 60.0}, 0.2, Vector3d::Zero());
  CHECK(p.dims().nx == 500);
  CHECK(p.dims().ny == 300);
  CHECK(p.dims().nz == 300);
  CHECK(p.occupied_count() == 500u * 300u * 300u);
  CHECK(create_phantom({10.0, 10.0, 10.0}, 1.0, Vector3d::Zero()).occupied_count() == 1000u);
}

TEST_CASE("invalid construction") {
  CHECK_THROWS_AS(create_phantom({100.0, 100.0, 100.0}, 0.0, Vector3d::Zero()), Error);
  CHECK_THROWS_AS(create_phantom({100.0, 100.0, 100.0}, -1.0, Vector3d::Zero()), Error);
  CHECK_THROWS_AS(create_phantom({0.0, 100.0, 100.0}, 1.0, Vector3d::Zero()), Error);
  try {
    create_phantom({100.0, 100.0, 100.0}, 0.01, Vector3d::Zero(), 1'000'000);
    FAIL("expected budget error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Budget);
  }
}

TEST_CASE("straight sweep clears a capsule") {
  const VoxelPhantom full = create_phantom({80.0, 20.0, 20.0}, 0.2, {-10.0, -10.0, -10.0});
  VoxelPhantom p = full;
  const std::vector<Vector3d> path{{0.0, 0.0, 0.0}, {50.0, 0.0, 0.0}};
  const std::size_t changed = carve_swept_sphere(p, path, 3.0);
  CHECK(changed == full.occupied_count() - p.occupied_count());
  CHECK(cleared_volume(full, p) == doctest::Approx(oracle::kCapsuleVolume).epsilon(0.02));
  CHECK(carve_swept_sphere(p, path, 3.0) == 0u);
}

TEST_CASE("single point sweep clears a sphere") {
  const VoxelPhantom full = create_phantom({20.0, 20.0, 20.0}, 0.2, {-10.0, -10.0, -10.0});
  VoxelPhantom p = full;
  const std::vector<Vector3d> path{{0.1, 0.0, 0.0}};
  carve_swept_sphere(p, path, 3.0);
  CHECK(cleared_volume(full, p) == doctest::Approx(oracle::kSphereVolume).epsilon(0.02));
}

TEST_CASE("carving is order independent") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(1.0, 19.0);
  std::vector<std::pair<Vector3d, Vector3d>> caps;
  for (int i = 0; i < 6; ++i) caps.push_back({{u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)}});
  VoxelPhantom ref = create_phantom({20.0, 20.0, 20.0}, 0.25, Vector3d::Zero());
  for (const auto& [a, b] : caps) ref.carve_capsule(a, b, 1.2);
  std::vector<int> order{0, 1, 2, 3, 4, 5};
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(order.begin(), order.end(), rng);
    VoxelPhantom p = create_phantom({20.0, 20.0, 20.0}, 0.25, Vector3d::Zero());
    for (int i : order) p.carve_capsule(caps[i].first, caps[i].second, 1.2);
    CHECK(p == ref);
  }
}

TEST_CASE("occupancy never increases while carving") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 20.0);
  VoxelPhantom p = create_phantom({20.0, 20.0, 20.0}, 0.5, Vector3d::Zero());
  std::size_t prev = p.occupied_count();
  for (int i = 0; i < 30; ++i) {
    p.carve_capsule({u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)}, 0.8);
    const std::size_t now = p.occupied_count();
    CHECK(now <= prev);
    prev = now;
  }
}

TEST_CASE("capsule query counts without carving") {
  VoxelPhantom p = block(0.5);
  const std::size_t n = p.count_in_capsule({5.0, 0.0, 0.0}, {10.0, 0.0, 0.0}, 2.0);
  CHECK(n > 0u);
  CHECK(p.count_in_capsule({5.0, 0.0, 0.0}, {10.0, 0.0, 0.0}, 2.0, 3) == 3u);
  CHECK(p.carve_capsule({5.0, 0.0, 0.0}, {10.0, 0.0, 0.0}, 2.0) == n);
  CHECK(p.count_in_capsule({5.0, 0.0, 0.0}, {10.0, 0.0, 0.0}, 2.0) == 0u);
}

TEST_CASE("tunnel diameters track the cut radius") {
  for (double r : {3.0, 3.4, 3.7}) {
    VoxelPhantom p = block(0.2);
    const std::vector<Vector3d> path{{-5.0, 0.0, 0.0}, {35.0, 0.0, 0.0}};
    carve_swept_sphere(p, path, r);
    const TunnelSection s = tunnel_cross_section(p, {15.0, 0.0, 0.0}, Vector3d::UnitX());
    CHECK(std::abs(s.diameter - 2.0 * r) <= 2.0 * 0.2);
    CHECK(s.diameter == s.inscribed_diameter);
    CHECK(std::abs(s.area_diameter - 2.0 * r) <= 0.2);
    CHECK((s.center - Vector3d(15.0, 0.0, 0.0)).norm() < 0.1);
    CHECK(tunnel_diameter(p, {15.0, 0.0, 0.0}, Vector3d::UnitX()) == s.diameter);
  }
}

TEST_CASE("diameter converges under voxel refinement") {
  double prev = 0.0;
  for (double v : {0.4, 0.2, 0.1}) {
    VoxelPhantom p = create_phantom({20.0, 12.0, 12.0}, v, {0.0, -6.0, -6.0});
    const std::vector<Vector3d> path{{-5.0, 0.0, 0.0}, {25.0, 0.0, 0.0}};
    carve_swept_sphere(p, path, 3.4);
    const double d = tunnel_diameter(p, {10.0, 0.0, 0.0}, Vector3d::UnitX());
    if (prev > 0.0) CHECK(std::abs(d - prev) <= 2.0 * v);
    prev = d;
  }
}

TEST_CASE("section through solid material has no tunnel") {
  const VoxelPhantom p = block(0.5);
  try {
    tunnel_cross_section(p, {15.0, 0.0, 0.0}, Vector3d::UnitX());
    FAIL("expected NoTunnel");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoTunnel);
  }
}

TEST_CASE("material fraction") {
  VoxelPhantom p = block(0.5);
  CHECK(p.material_fraction({15.0, 0.0, 0.0}) == doctest::Approx(1.0));
  CHECK(p.material_fraction({-50.0, 0.0, 0.0}) == doctest::Approx(1.0));
  p.carve_capsule({10.0, 0.0, 0.0}, {20.0, 0.0, 0.0}, 2.0);
  CHECK(p.material_fraction({15.0, 0.0, 0.0}) == doctest::Approx(0.0));
  CHECK_FALSE(p.occupied_at({15.0, 0.0, 0.0}));
  CHECK(p.occupied_at({15.0, 5.0, 0.0}));
  CHECK_FALSE(p.occupied_at({-50.0, 0.0, 0.0}));
}

TEST_CASE("projections") {
  VoxelPhantom full = create_phantom({10.0, 8.0, 6.0}, 0.5, Vector3d::Zero());
  const GrayImage img = project(full, Axis::Z);
  CHECK(img.width == 20);
  CHECK(img.height == 16);
  CHECK(std::all_of(img.pixels.begin(), img.pixels.end(), [&](auto px) { return px == img.pixels.front(); }));
  CHECK(img.pixels.front() == 0);

  VoxelPhantom empty = full;
  empty.carve_capsule({5.0, 4.0, 3.0}, {5.0, 4.0, 3.0}, 100.0);
  CHECK(empty.occupied_count() == 0u);
  const GrayImage blank = project(empty, Axis::X);
  CHECK(std::all_of(blank.pixels.begin(), blank.pixels.end(), [](auto px) { return px == 255; }));
}

TEST_CASE("a straight tunnel projects as a bright band") {
  // 6 mm tunnel along x at mid-depth in z, viewed along z.
  VoxelPhantom p = create_phantom({30.0, 30.0, 20.0}, 0.2, Vector3d::Zero());
  const std::vector<Vector3d> path{{-5.0, 15.0, 10.0}, {35.0, 15.0, 10.0}};
  carve_swept_sphere(p, path, 3.0);
  const GrayImage img = project(p, Axis::Z);
  const int col = img.width / 2;
  const std::uint8_t background = img.at(col, 0);
  int bright = 0;
  for (int row = 0; row < img.height; ++row) bright += img.at(col, row) > background;
  CHECK(std::abs(bright * 0.2 - 6.0) <= 2 * 0.2);
  CHECK(img.at(col, img.height / 2) == doctest::Approx(255.0 * 6.0 / 20.0).epsilon(0.05));
}

TEST_CASE("axis names") {
  CHECK(parse_axis("x") == Axis::X);
  CHECK(parse_axis("Z") == Axis::Z);
  CHECK(std::string(to_string(Axis::Y)) == "y");
  CHECK_THROWS_AS(parse_axis("w"), Error);
}

TEST_CASE("pgm header") {
  GrayImage img{3, 2, {0, 1, 2, 3, 4, 5}};
  std::ostringstream os;
  write_pgm(os, img);
  const std::string s = os.str();
  CHECK(s.rfind("P5\n3 2\n255\n", 0) == 0);
  CHECK(s.size() == std::string("P5\n3 2\n255\n").size() + 6);
}

TEST_CASE("snapshot round trip") {
  VoxelPhantom p = block(0.5);
  p.carve_capsule({2.0, 0.0, 0.0}, {25.0, 3.0, -2.0}, 2.5);
  const auto dir = std::filesystem::temp_directory_path() / "ctsdr_test_snapshot";
  std::filesystem::create_directories(dir);
  write_snapshot(p, dir / "p.bits", dir / "p.json");
  const VoxelPhantom back = read_snapshot(dir / "p.bits", dir / "p.json");
  CHECK(back == p);
  CHECK(back.voxel_size() == p.voxel_size());
  CHECK(back.origin() == p.origin());
  CHECK(back.material() == p.material());
  CHECK(p.to_bytes().size() == (static_cast<std::size_t>(60) * 40 * 40 + 7) / 8);
  std::filesystem::remove_all(dir);
}

TEST_CASE("default scenario phantom starts at the sheath mouth") {
  const Frame pose = default_sheath_pose();
  const VoxelPhantom p = default_scenario_phantom(pose, 0.5);
  CHECK(p.dims().nx == 200);
  CHECK(p.dims().ny == 120);
  CHECK(p.dims().nz == 120);
  CHECK(p.inside({0.1, 0.0, 0.0}));
  CHECK_FALSE(p.inside({-0.1, 0.0, 0.0}));
}
