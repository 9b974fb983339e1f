#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "lfdepth/bench.hpp"
#include "lfdepth/errors.hpp"
#include "lfdepth/pipeline.hpp"
#include "lfdepth/pointcloud.hpp"
#include "oracles.hpp"
#include "tempdir.hpp"

using namespace lfdepth;

namespace {

DepthMap random_depth(int w, int h, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(0.5, 4.0), keep(0.0, 1.0);
  DepthMap d(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (keep(gen) < 0.8) d.set(x, y, u(gen));
  return d;
}

Calibration test_calibration() {
  Calibration c;
  c.focal_length_px = 120.0;
  c.baseline = 0.03;
  c.cx = 11.5;
  c.cy = 7.5;
  return c;
}

PointCloud random_cloud(std::size_t n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-10.0, 10.0), c(0.0, 1.0);
  PointCloud cloud;
  for (std::size_t i = 0; i < n; ++i) {
    CloudPoint p;
    p.x = u(gen);
    p.y = u(gen);
    p.z = u(gen);
    p.r = c(gen);
    p.g = c(gen);
    p.b = c(gen);
    cloud.points.push_back(p);
  }
  return cloud;
}

}  // namespace

TEST_CASE("principal ray and unit-focal geometry") {
  Calibration c;
  c.focal_length_px = 1.0;
  DepthMap d(4, 4);
  d.set(2, 3, 1.0);
  const PointCloud pc = backproject(d, Image(4, 4, 3, 0.5), {0, 0}, {0, 0}, c);
  REQUIRE(pc.size() == 1);
  CHECK(pc.points[0].x == 2.0);
  CHECK(pc.points[0].y == 3.0);
  CHECK(pc.points[0].z == 1.0);

  const Calibration tc = test_calibration();
  DepthMap center(24, 16);
  center.set(11, 7, 2.0);
  Image view(24, 16, 3, 0.0);
  view.at(11, 7, 0) = 0.25;
  // pixel centres sit at integer coordinates, so (cx, cy) falls between pixels
  const PointCloud q = backproject(center, view, {1, 2}, {2, 2}, tc);
  REQUIRE(q.size() == 1);
  CHECK(q.points[0].x == doctest::Approx((11 - 11.5) * 2.0 / 120.0 - 0.03));
  CHECK(q.points[0].y == doctest::Approx((7 - 7.5) * 2.0 / 120.0));
  CHECK(q.points[0].r == 0.25);
  CHECK(q.points[0].source == ViewIndex{1, 2});
}

TEST_CASE("backprojection skips invalid pixels and reprojects exactly") {
  const Calibration c = test_calibration();
  const DepthMap d = random_depth(24, 16, 1);
  for (ViewIndex v : {ViewIndex{2, 2}, ViewIndex{0, 4}, ViewIndex{3, 1}}) {
    const PointCloud pc = backproject(d, Image(24, 16, 3, 0.5), v, {2, 2}, c);
    CHECK(pc.size() == d.valid_count());
    std::size_t k = 0;
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 24; ++x) {
        if (!d.is_valid(x, y)) continue;
        const auto uv = project(pc.points[k++], v, {2, 2}, c);
        CHECK(std::abs(uv[0] - x) < 1e-9);
        CHECK(std::abs(uv[1] - y) < 1e-9);
      }
  }
}

TEST_CASE("fusing identical clouds") {
  const PointCloud pc = random_cloud(200, 2);
  const std::vector<PointCloud> three{pc, pc, pc};
  CHECK(fuse_clouds(three).size() == 600);
  const std::size_t once = fuse_clouds(std::span<const PointCloud>(&pc, 1), 1.5).size();
  CHECK(once < 200);
  CHECK(fuse_clouds(three, 1.5).size() == once);
  // first come, first kept
  const PointCloud fused = fuse_clouds(three, 1.5);
  CHECK(fused.points[0].x == pc.points[0].x);
}

TEST_CASE("coarser voxels never keep more points") {
  const PointCloud pc = random_cloud(500, 3);
  std::size_t previous = pc.size();
  for (double v : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    const std::size_t n = fuse_clouds(std::span<const PointCloud>(&pc, 1), v).size();
    CHECK(n <= previous);
    previous = n;
  }
}

TEST_CASE("ply output round-trips through an independent reader") {
  const PointCloud pc = random_cloud(50, 4);
  for (PlyFormat f : {PlyFormat::Ascii, PlyFormat::BinaryLittleEndian}) {
    std::ostringstream out;
    write_ply(pc, out, f);
    const auto vertices = oracle::read_ply(out.str());
    REQUIRE(vertices.size() == pc.size());
    for (std::size_t i = 0; i < pc.size(); ++i) {
      CHECK(vertices[i].x == static_cast<float>(pc.points[i].x));
      CHECK(vertices[i].y == static_cast<float>(pc.points[i].y));
      CHECK(vertices[i].z == static_cast<float>(pc.points[i].z));
      CHECK(vertices[i].r == static_cast<int>(std::lround(pc.points[i].r * 255.0)));
    }
  }
  std::ostringstream empty;
  write_ply(PointCloud{}, empty, PlyFormat::Ascii);
  CHECK(empty.str().find("element vertex 0") != std::string::npos);
  CHECK(oracle::read_ply(empty.str()).empty());
  CHECK_THROWS_AS(write_ply(pc, "/nonexistent/dir/cloud.ply", PlyFormat::Ascii), IoError);

  TempDir dir;
  write_ply(pc, dir.path() / "one.ply", PlyFormat::BinaryLittleEndian);
  CHECK(std::filesystem::file_size(dir.path() / "one.ply") > 50 * 15);
}

TEST_CASE("warping by zero steps is the identity") {
  DisparityMap d(10, 6);
  for (int i = 0; i < 60; ++i)
    if (i % 7) d.set(i % 10, i / 10, -1.0 - 0.01 * i);
  CHECK(warp_disparity_to_view(d, 0, 0) == d);
}

TEST_CASE("dense cloud of a constant-depth field lies on the plane") {
  const SyntheticScene scene = make_synthetic_lightfield(constant_scene(1.6, 64, 3));
  const PointCloud dense = light_field_point_cloud(scene.light_field, scene.ground_truth, true);
  const Calibration& c = scene.light_field.calibration();
  const double z = c.focal_length_px * c.baseline / 1.6;
  CHECK(dense.size() > 8 * 64 * 60);
  for (const auto& p : dense.points) CHECK(std::abs(p.z - z) <= 0.01 * z);
}

TEST_CASE("dense cloud from estimated disparity") {
  const SyntheticScene scene = make_synthetic_lightfield(constant_scene(1.6, 64, 3));
  const DepthEstimate est = estimate_depth(scene.light_field, PipelineConfig{});
  const PointCloud single = light_field_point_cloud(scene.light_field, est.disparity, false);
  const PointCloud dense = light_field_point_cloud(scene.light_field, est.disparity, true);
  CHECK(single.size() == est.disparity.valid_count());
  CHECK(dense.size() > single.size());
  std::size_t bound = 0;
  for (int t = 0; t < 3; ++t)
    for (int s = 0; s < 3; ++s) bound += warp_disparity_to_view(est.disparity, s - 1, t - 1).valid_count();
  CHECK(dense.size() == bound);
  CHECK(light_field_point_cloud(scene.light_field, est.disparity, true, 0.01).size() <= dense.size());
}
