#include <cmath>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "lfdepth/bench.hpp"
#include "lfdepth/cpm.hpp"
#include "lfdepth/errors.hpp"
#include "oracles.hpp"

using namespace lfdepth;

namespace {

// I2(x) = I1(x - shift): content moves by +shift.
std::pair<Image, Image> shifted_pair(int w, int h, int shift, std::uint32_t seed) {
  const Image big = oracle::noise_image(w + 32, h, seed);
  return {oracle::crop(big, 16, 0, w, h), oracle::crop(big, 16 - shift, 0, w, h)};
}

}  // namespace

TEST_CASE("pyramid sizes shrink by ceil(eta * size)") {
  const Pyramid p = build_pyramid(Image(512, 512, 3, 0.5), 5, 0.5);
  REQUIRE(p.levels.size() == 5);
  const int expected[] = {512, 256, 128, 64, 32};
  for (int l = 0; l < 5; ++l) {
    CHECK(p.levels[l].width() == expected[l]);
    CHECK(p.levels[l].height() == expected[l]);
  }
  const Pyramid odd = build_pyramid(Image(45, 33, 3, 0.5), 2, 0.5);
  CHECK(odd.levels[1].width() == 23);
  CHECK(odd.levels[1].height() == 17);
  const Image img = oracle::noise_image(30, 20, 1);
  CHECK(build_pyramid(img, 1, 0.5).levels.front() == img);
  CHECK_THROWS_AS(build_pyramid(Image(20, 20, 3), 5, 0.5), SizeError);
  CHECK(feasible_levels(128, 128, 5, 0.5, 16) == 4);
  CHECK(feasible_levels(512, 512, 5, 0.5, 16) == 5);
}

TEST_CASE("pyramid keeps constant images constant") {
  const Pyramid p = build_pyramid(Image(64, 72, 3, 0.3), 3, 0.5);
  for (const auto& level : p.levels)
    for (double v : level.data()) CHECK(v == doctest::Approx(0.3));
}

TEST_CASE("match cost is the patch SAD") {
  DescriptorField a(5, 5, 8), b(5, 5, 8);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) {
      a.at(x, y)[0] = 1.0f;
      b.at(x, y)[3] = 1.0f;
    }
  CHECK(match_cost(a, {2, 2}, a, {2, 2}) == 0.0);
  CHECK(match_cost(a, {2, 2}, b, {2, 2}) == doctest::Approx(18.0));

  std::mt19937 gen(3);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  DescriptorField r1(7, 6, 8), r2(7, 6, 8);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 7; ++x)
      for (int k = 0; k < 8; ++k) {
        r1.at(x, y)[k] = u(gen);
        r2.at(x, y)[k] = u(gen);
      }
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 7; ++x) {
      const SeedPoint p1{x, y}, p2{6 - x, 5 - y};
      CHECK(match_cost(r1, p1, r2, p2) == doctest::Approx(oracle::sad(r1, x, y, r2, 6 - x, 5 - y, 3)).epsilon(1e-6));
    }
}

TEST_CASE("seed grid lies inside the image") {
  const SeedGrid g = make_seed_grid(20, 11, 3);
  CHECK(g.size() == static_cast<std::size_t>(g.cols * g.rows));
  for (const auto& s : g.seeds) {
    CHECK(s.x >= 0);
    CHECK(s.x < 20);
    CHECK(s.y >= 0);
    CHECK(s.y < 11);
  }
}

TEST_CASE("patch match on identical descriptors keeps the zero init") {
  const DescriptorField d = compute_descriptors(oracle::noise_image(32, 32, 9));
  const SeedGrid grid = make_seed_grid(32, 32, 3);
  SparseMatchSet init{32, 32, {}, 0};
  for (const auto& s : grid.seeds) init.matches.push_back({s.x, s.y, 0.0, 0.0, 0.0, 1.0});
  const SparseMatchSet out = patchmatch_level(d, d, grid, init, SearchParams{});
  for (const auto& m : out.matches) {
    CHECK(m.u == 0.0);
    CHECK(m.v == 0.0);
    CHECK(m.cost == 0.0);
  }
}

TEST_CASE("radius zero returns the initialisation") {
  const auto [i1, i2] = shifted_pair(32, 32, 2, 4);
  const DescriptorField d1 = compute_descriptors(i1), d2 = compute_descriptors(i2);
  const SeedGrid grid = make_seed_grid(32, 32, 3);
  SparseMatchSet init{32, 32, {}, 0};
  for (std::size_t i = 0; i < grid.size(); ++i)
    init.matches.push_back({grid.seeds[i].x, grid.seeds[i].y, static_cast<double>(i % 3) - 1.0, 0.0, 0.0, 1.0});
  SearchParams sp;
  sp.radius = 0;
  const SparseMatchSet out = patchmatch_level(d1, d2, grid, init, sp);
  REQUIRE(out.matches.size() == init.matches.size());
  for (std::size_t i = 0; i < out.matches.size(); ++i) {
    const int tx = std::clamp(grid.seeds[i].x + static_cast<int>(init.matches[i].u), 0, 31);
    CHECK(out.matches[i].x + out.matches[i].u == doctest::Approx(tx));
    CHECK(out.matches[i].v == 0.0);
  }
}

TEST_CASE("global shift is found with the exhaustive-search cost") {
  const int shift = 3, r = 8;
  const auto [i1, i2] = shifted_pair(64, 64, shift, 11);
  const DescriptorField d1 = compute_descriptors(i1), d2 = compute_descriptors(i2);
  const SeedGrid grid = make_seed_grid(64, 64, 3);
  SearchParams sp;
  sp.radius = r;
  sp.seed = 5;
  PatchMatchTrace trace;
  const SparseMatchSet out = patchmatch_level(d1, d2, grid, std::nullopt, sp, &trace);
  int interior = 0, good = 0;
  for (const auto& m : out.matches) {
    CHECK(m.v == 0.0);
    if (m.x < 16 || m.x >= 48 - shift) continue;
    ++interior;
    double best = std::numeric_limits<double>::infinity();
    for (int u = -r; u <= r; ++u)
      if (m.x + u >= 0 && m.x + u < 64) best = std::min(best, oracle::sad(d1, m.x, m.y, d2, m.x + u, m.y, 3));
    if (m.u == shift && m.cost <= best * (1 + 1e-5) + 1e-9) ++good;
  }
  CHECK(good >= 0.95 * interior);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double prev = trace.initial[i];
    for (const auto& it : trace.per_iteration) {
      CHECK(it[i] <= prev);
      prev = it[i];
    }
  }
}

TEST_CASE("coarse-to-fine matching recovers a constant disparity") {
  const SyntheticScene scene = make_synthetic_lightfield(constant_scene(2.0, 64, 3));
  const Image& a = scene.light_field.view(0, 1);
  const Image& b = scene.light_field.view(1, 1);
  const SparseMatchSet m = cpm_match(a, b, CpmParams{});
  REQUIRE(!m.matches.empty());
  int close = 0;
  for (const auto& s : m.matches) {
    close += std::abs(s.u + 2.0) <= 1.0;
    CHECK(s.v == 0.0);
    CHECK(s.x + s.u >= 0.0);
    CHECK(s.x + s.u <= 63.0);
  }
  CHECK(close >= 0.9 * m.matches.size());
}

TEST_CASE("identity pair gives zero flow and full confidence") {
  const Image img = oracle::noise_image(48, 40, 12);
  const SparseMatchSet m = cpm_match(img, img, CpmParams{});
  CHECK(m.matches.size() == make_seed_grid(48, 40, 3).size());
  for (const auto& s : m.matches) {
    CHECK(s.u == 0.0);
    CHECK(s.confidence == 1.0);
  }
}

TEST_CASE("textureless pairs lose most seeds to the consistency check") {
  const Image flat(48, 48, 3, 0.5);
  const SparseMatchSet m = cpm_match(flat, flat, CpmParams{});
  CHECK(m.matches.size() < make_seed_grid(48, 48, 3).size() / 2);
}

TEST_CASE("confidence follows the forward-backward difference") {
  const SeedGrid grid = make_seed_grid(9, 3, 3);
  SparseMatchSet fwd{9, 3, {}, 0}, bwd{9, 3, {}, 0};
  for (const auto& s : grid.seeds) {
    fwd.matches.push_back({s.x, s.y, 0.0, 0.0, 0.0, 1.0});
    bwd.matches.push_back({s.x, s.y, 0.0, 0.0, 0.0, 1.0});
  }
  auto c = flow_confidence(fwd, bwd, grid, 1.0);
  for (double v : c) CHECK(v == 1.0);
  for (auto& m : bwd.matches) m.u = 1.0;
  c = flow_confidence(fwd, bwd, grid, 1.0);
  for (double v : c) CHECK(v == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("matching is reproducible for a fixed seed") {
  const auto [i1, i2] = shifted_pair(48, 40, 2, 21);
  CpmParams p;
  p.rng_seed = 99;
  const SparseMatchSet a = cpm_match(i1, i2, p, 3);
  const SparseMatchSet b = cpm_match(i1, i2, p, 3);
  std::ostringstream sa, sb;
  write_matches(sa, a);
  write_matches(sb, b);
  CHECK(sa.str() == sb.str());
  CHECK(a.rng_seed == 99);
}
