#include <cmath>

#include "doctest.h"
#include "lfdepth/bench.hpp"
#include "lfdepth/errors.hpp"
#include "lfdepth/fusion.hpp"
#include "lfdepth/pipeline.hpp"

using namespace lfdepth;

TEST_CASE("a single view has no volume") {
  CHECK_THROWS_AS(LightField(1, 1, {Image(16, 16, 3, 0.5)}, Calibration{}), StructureError);
  PipelineConfig none;
  none.rows.clear();
  none.cols.clear();
  const SyntheticScene scene = make_synthetic_lightfield(constant_scene(1.6, 32, 3));
  CHECK_THROWS_AS(estimate_depth(scene.light_field, none), StructureError);
}

TEST_CASE("volume selection") {
  const SyntheticScene scene = make_synthetic_lightfield(constant_scene(1.6, 32, 5));
  PipelineConfig c;
  c.rows = {kCenterIndex, 0};
  c.cols = {4};
  const auto v = selected_volumes(scene.light_field, c);
  REQUIRE(v.size() == 3);
  CHECK(v[0] == std::pair{Axis::Row, 2});
  CHECK(v[1] == std::pair{Axis::Row, 0});
  CHECK(v[2] == std::pair{Axis::Column, 4});
  c.rows = {5};
  CHECK_THROWS_AS(estimate_depth(scene.light_field, c), IndexError);
}

TEST_CASE("constant-depth 5x5 field") {
  const SyntheticScene scene = make_synthetic_lightfield(constant_scene(1.6, 128, 5));
  const DepthEstimate est = estimate_depth(scene.light_field, PipelineConfig{});
  const DepthMap truth = disparity_to_depth(scene.ground_truth, scene.light_field.calibration());
  // default evaluation mask: the descriptor-support band is excluded
  const auto mask = border_mask(128, 128, 16);
  std::size_t good = 0, total = 0;
  for (std::size_t i = 0; i < truth.values.size(); ++i) {
    if (!mask[i]) continue;
    ++total;
    good += est.depth.valid[i] && std::abs(est.depth.values[i] - truth.values[i]) <= 0.01 * truth.values[i];
  }
  CHECK(static_cast<double>(good) >= 0.99 * static_cast<double>(total));
  CHECK(est.stack.size() == 8);
  CHECK(est.volumes.size() == 2);
}

TEST_CASE("more rows give at least as many estimates per pixel") {
  const SyntheticScene scene = make_synthetic_lightfield(constant_scene(1.6, 64, 5));
  PipelineConfig one;
  one.cols.clear();
  PipelineConfig three = one;
  three.rows = {1, 2, 3};
  const DepthEstimate a = estimate_depth(scene.light_field, one);
  const DepthEstimate b = estimate_depth(scene.light_field, three);
  CHECK(a.depth.valid_count() > 0);
  CHECK(b.depth.valid_count() > 0);
  for (std::size_t i = 0; i < a.depth.values.size(); ++i) {
    std::size_t na = 0, nb = 0;
    for (const auto& m : a.stack.maps) na += m.valid[i];
    for (const auto& m : b.stack.maps) nb += m.valid[i];
    CHECK(nb >= na);
  }
}

TEST_CASE("estimates are deterministic for a fixed seed") {
  const SyntheticScene scene = make_synthetic_lightfield(two_plane_scene(1.0, 3.0, 64, 3));
  PipelineConfig c;
  c.cpm.rng_seed = 1234;
  const DepthEstimate a = estimate_depth(scene.light_field, c);
  const DepthEstimate b = estimate_depth(scene.light_field, c);
  CHECK(a.depth == b.depth);
  CHECK(a.fused == b.fused);
}

TEST_CASE("smoothness weight is one where the map is flat") {
  DisparityMap d(12, 8);
  for (int i = 0; i < 96; ++i) d.set(i % 12, i / 12, -1.0);
  for (double a : smoothness_weights(d, Image(12, 8, 3, 0.3), RefineParams{})) CHECK(a == 1.0);
}
