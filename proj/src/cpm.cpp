#include "lfdepth/cpm.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "lfdepth/errors.hpp"
#include "lfdepth/parallel.hpp"
#include "lfdepth/rng.hpp"

namespace lfdepth {

namespace {

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

Image blur(const Image& img, double sigma) {
  const auto k = gaussian_kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);
  const int w = img.width();
  const int h = img.height();
  const int ch = img.channels();
  Image tmp(w, h, ch);
  parallel_for(h, [&](std::ptrdiff_t yy) {
    const int y = static_cast<int>(yy);
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i)
          acc += k[static_cast<std::size_t>(i + radius)] * img.at(std::clamp(x + i, 0, w - 1), y, c);
        tmp.at(x, y, c) = acc;
      }
  });
  Image out(w, h, ch);
  parallel_for(h, [&](std::ptrdiff_t yy) {
    const int y = static_cast<int>(yy);
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i)
          acc += k[static_cast<std::size_t>(i + radius)] * tmp.at(x, std::clamp(y + i, 0, h - 1), c);
        out.at(x, y, c) = acc;
      }
  });
  return out;
}

Image downsample(const Image& img, double eta) {
  const Image smooth = blur(img, 0.5 * std::sqrt(1.0 / (eta * eta) - 1.0));
  const int w = static_cast<int>(std::ceil(img.width() * eta));
  const int h = static_cast<int>(std::ceil(img.height() * eta));
  Image out(w, h, img.channels());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < img.channels(); ++c)
        out.at(x, y, c) = sample_bilinear_clamped(smooth, (x + 0.5) / eta - 0.5, (y + 0.5) / eta - 0.5, c);
  return out;
}

int level_size(int size, double eta, int level) {
  for (int l = 0; l < level; ++l) size = static_cast<int>(std::ceil(size * eta));
  return size;
}

}  // namespace

int feasible_levels(int width, int height, int requested, double eta, int min_size) {
  int levels = 0;
  int w = width;
  int h = height;
  while (levels < requested && w >= min_size && h >= min_size) {
    ++levels;
    w = static_cast<int>(std::ceil(w * eta));
    h = static_cast<int>(std::ceil(h * eta));
  }
  return levels;
}

Pyramid build_pyramid(const Image& img, int levels, double eta, int min_size) {
  if (levels < 1) throw SizeError("pyramid needs at least one level");
  if (!(eta > 0.0 && eta < 1.0)) throw SizeError("pyramid factor must lie in (0, 1)");
  const int cw = level_size(img.width(), eta, levels - 1);
  const int ch = level_size(img.height(), eta, levels - 1);
  if (cw < min_size || ch < min_size)
    throw SizeError("coarsest pyramid level " + std::to_string(cw) + "x" + std::to_string(ch) +
                    " is below the descriptor support of " + std::to_string(min_size) + " px");
  Pyramid p;
  p.factor = eta;
  p.levels.push_back(img);
  for (int l = 1; l < levels; ++l) p.levels.push_back(downsample(p.levels.back(), eta));
  return p;
}

SeedGrid make_seed_grid(int width, int height, int spacing) {
  if (spacing < 1) throw SizeError("seed spacing must be positive");
  SeedGrid g;
  g.spacing = spacing;
  g.offset = spacing / 2;
  g.cols = g.offset < width ? (width - 1 - g.offset) / spacing + 1 : 0;
  g.rows = g.offset < height ? (height - 1 - g.offset) / spacing + 1 : 0;
  g.seeds.reserve(static_cast<std::size_t>(g.cols) * static_cast<std::size_t>(g.rows));
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c) g.seeds.push_back({g.offset + c * spacing, g.offset + r * spacing});
  return g;
}

SeedGrid scale_seed_grid(const SeedGrid& grid, double scale, int width, int height) {
  SeedGrid g = grid;
  for (auto& p : g.seeds) {
    p.x = std::clamp(static_cast<int>(std::lround(p.x * scale)), 0, width - 1);
    p.y = std::clamp(static_cast<int>(std::lround(p.y * scale)), 0, height - 1);
  }
  return g;
}

namespace {

float sad(std::span<const float> a, std::span<const float> b) noexcept {
  float acc[8] = {};
  const std::size_t n = a.size();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    for (std::size_t j = 0; j < 8; ++j) acc[j] += std::abs(a[i + j] - b[i + j]);
  float total = 0.0f;
  for (; i < n; ++i) total += std::abs(a[i] - b[i]);
  for (float v : acc) total += v;
  return total;
}

}  // namespace

double match_cost(const DescriptorField& desc1, SeedPoint p1, const DescriptorField& desc2, SeedPoint p2, int patch) {
  const int r = patch / 2;
  double cost = 0.0;
  for (int dy = -r; dy <= r; ++dy) {
    const int y1 = std::clamp(p1.y + dy, 0, desc1.height() - 1);
    const int y2 = std::clamp(p2.y + dy, 0, desc2.height() - 1);
    for (int dx = -r; dx <= r; ++dx) {
      const int x1 = std::clamp(p1.x + dx, 0, desc1.width() - 1);
      const int x2 = std::clamp(p2.x + dx, 0, desc2.width() - 1);
      cost += sad(desc1.at(x1, y1), desc2.at(x2, y2));
    }
  }
  return cost;
}

SparseMatchSet patchmatch_level(const DescriptorField& desc1, const DescriptorField& desc2, const SeedGrid& seeds,
                                const std::optional<SparseMatchSet>& init, const SearchParams& search,
                                PatchMatchTrace* trace) {
  const std::size_t n = seeds.size();
  if (init && init->matches.size() != n) throw SizeError("patch match init does not match the seed grid");
  const int w2 = desc2.width();
  const int h2 = desc2.height();
  const int radius = std::max(0, search.radius);
  Rng rng(search.seed);

  std::vector<int> us(n), vs(n);
  std::vector<double> costs(n);
  auto target_ok = [&](std::size_t k, int u, int v) {
    const int tx = seeds.seeds[k].x + u;
    const int ty = seeds.seeds[k].y + v;
    return tx >= 0 && tx < w2 && ty >= 0 && ty < h2;
  };
  auto candidate_ok = [&](std::size_t k, int u, int v) {
    if (std::abs(u) > radius || std::abs(v) > radius) return false;
    if (search.epipolar && v != 0) return false;
    return target_ok(k, u, v);
  };
  auto cost_of = [&](std::size_t k, int u, int v) {
    const SeedPoint p = seeds.seeds[k];
    return match_cost(desc1, p, desc2, {p.x + u, p.y + v}, search.patch);
  };

  for (std::size_t k = 0; k < n; ++k) {
    const SeedPoint p = seeds.seeds[k];
    int u = 0, v = 0;
    if (init) {
      u = static_cast<int>(std::lround(init->matches[k].u));
      v = search.epipolar ? 0 : static_cast<int>(std::lround(init->matches[k].v));
      u = std::clamp(p.x + u, 0, w2 - 1) - p.x;
      v = std::clamp(p.y + v, 0, h2 - 1) - p.y;
    } else {
      u = static_cast<int>(uniform_int(rng, std::max(-radius, -p.x), std::min(radius, w2 - 1 - p.x)));
      if (!search.epipolar)
        v = static_cast<int>(uniform_int(rng, std::max(-radius, -p.y), std::min(radius, h2 - 1 - p.y)));
    }
    us[k] = u;
    vs[k] = v;
    costs[k] = cost_of(k, u, v);
  }
  if (trace) {
    trace->initial = costs;
    trace->per_iteration.clear();
  }

  // A zero radius allows no motion away from the initialisation.
  auto try_candidate = [&](std::size_t k, int u, int v) {
    if (radius == 0 || (u == us[k] && v == vs[k])) return;
    if (!candidate_ok(k, u, v)) return;
    const double c = cost_of(k, u, v);
    if (c < costs[k]) {
      costs[k] = c;
      us[k] = u;
      vs[k] = v;
    }
  };

  const int cols = seeds.cols;
  const int rows = seeds.rows;
  for (int it = 0; it < search.iterations; ++it) {
    const bool forward = it % 2 == 0;
    const int step = forward ? -1 : 1;
    for (std::size_t idx = 0; idx < n; ++idx) {
      const std::size_t k = forward ? idx : n - 1 - idx;
      const int col = static_cast<int>(k) % cols;
      const int row = static_cast<int>(k) / cols;
      const int ncol = col + step;
      if (ncol >= 0 && ncol < cols) {
        const std::size_t q = static_cast<std::size_t>(row * cols + ncol);
        try_candidate(k, us[q], vs[q]);
      }
      const int nrow = row + step;
      if (nrow >= 0 && nrow < rows) {
        const std::size_t q = static_cast<std::size_t>(nrow * cols + col);
        try_candidate(k, us[q], vs[q]);
      }
      for (int r = radius; r >= 1; r /= 2) {
        const SeedPoint p = seeds.seeds[k];
        const int lo_u = std::max({-radius, -p.x, us[k] - r});
        const int hi_u = std::min({radius, w2 - 1 - p.x, us[k] + r});
        const int cu = static_cast<int>(uniform_int(rng, lo_u, std::max(lo_u, hi_u)));
        int cv = 0;
        if (!search.epipolar) {
          const int lo_v = std::max({-radius, -p.y, vs[k] - r});
          const int hi_v = std::min({radius, h2 - 1 - p.y, vs[k] + r});
          cv = static_cast<int>(uniform_int(rng, lo_v, std::max(lo_v, hi_v)));
        }
        try_candidate(k, cu, cv);
      }
    }
    if (trace) trace->per_iteration.push_back(costs);
  }

  SparseMatchSet out;
  out.width = desc1.width();
  out.height = desc1.height();
  out.rng_seed = search.seed;
  out.matches.resize(n);
  for (std::size_t k = 0; k < n; ++k)
    out.matches[k] = {seeds.seeds[k].x, seeds.seeds[k].y, static_cast<double>(us[k]), static_cast<double>(vs[k]),
                      costs[k], 1.0};
  return out;
}

CpmFrame make_cpm_frame(const Image& img, const CpmParams& params) {
  params.descriptor.validate();
  const int support = params.descriptor.support();
  if (img.width() < support || img.height() < support)
    throw SizeError("image " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                    " is smaller than the descriptor support of " + std::to_string(support) + " px");
  const int levels = std::max(1, feasible_levels(img.width(), img.height(), params.levels, params.eta, support));
  const Pyramid pyr = build_pyramid(img, levels, params.eta, support);
  CpmFrame frame;
  frame.width = img.width();
  frame.height = img.height();
  for (const Image& level : pyr.levels) frame.levels.push_back(compute_descriptors(level, params.descriptor));
  return frame;
}

namespace {

// Vertex of the symmetric V through the three costs. SAD grows roughly
// linearly away from the true match, where a parabola biases towards 0.
double equiangular_offset(double cm, double c0, double cp) {
  if (!(c0 > 0.0)) return 0.0;  // exact match
  const double slope = std::max(cm, cp) - c0;
  if (!(slope > 0.0)) return 0.0;
  return std::clamp(0.5 * (cm - cp) / slope, -0.5, 0.5);
}

void refine_subpixel(SparseMatchSet& set, const DescriptorField& d1, const DescriptorField& d2, int patch,
                     bool epipolar) {
  for (auto& m : set.matches) {
    const int u = static_cast<int>(m.u);
    const int v = static_cast<int>(m.v);
    const SeedPoint p{m.x, m.y};
    const int tx = m.x + u;
    const int ty = m.y + v;
    if (tx - 1 >= 0 && tx + 1 < d2.width()) {
      const double cm = match_cost(d1, p, d2, {tx - 1, ty}, patch);
      const double cp = match_cost(d1, p, d2, {tx + 1, ty}, patch);
      m.u = u + equiangular_offset(cm, m.cost, cp);
    }
    if (!epipolar && ty - 1 >= 0 && ty + 1 < d2.height()) {
      const double cm = match_cost(d1, p, d2, {tx, ty - 1}, patch);
      const double cp = match_cost(d1, p, d2, {tx, ty + 1}, patch);
      m.v = v + equiangular_offset(cm, m.cost, cp);
    }
  }
}

SparseMatchSet match_direction(const CpmFrame& fa, const CpmFrame& fb, const SeedGrid& grid, const CpmParams& params,
                               std::uint64_t stream_seed) {
  const int levels = static_cast<int>(std::min(fa.levels.size(), fb.levels.size()));
  std::optional<SparseMatchSet> prev;
  for (int l = levels - 1; l >= 0; --l) {
    const DescriptorField& da = fa.levels[static_cast<std::size_t>(l)];
    const DescriptorField& db = fb.levels[static_cast<std::size_t>(l)];
    const double scale = std::pow(params.eta, l);
    const SeedGrid level_grid = scale_seed_grid(grid, scale, da.width(), da.height());
    SearchParams sp;
    sp.radius = params.radius > 0 ? std::max(1, static_cast<int>(std::lround(params.radius * scale)))
                                  : std::max(db.width(), db.height());
    sp.epipolar = params.epipolar;
    sp.iterations = params.iterations;
    sp.patch = params.patch;
    sp.seed = mix_seed(stream_seed, static_cast<std::uint64_t>(l));
    if (prev) {
      for (auto& m : prev->matches) {
        m.u /= params.eta;
        m.v /= params.eta;
      }
    }
    prev = patchmatch_level(da, db, level_grid, prev, sp);
  }
  if (params.subpixel) refine_subpixel(*prev, fa.levels[0], fb.levels[0], params.patch, params.epipolar);
  return std::move(*prev);
}

// A match that moved onto the outermost column or row usually wants a target
// beyond the frame and was clamped; it cannot be refined either.
bool pinned_to_frame(const SparseMatch& m, int width, int height) {
  const long tx = std::lround(m.x + m.u);
  const long ty = std::lround(m.y + m.v);
  return (tx <= 0 && m.u < 0.0) || (tx >= width - 1 && m.u > 0.0) || (ty <= 0 && m.v < 0.0) ||
         (ty >= height - 1 && m.v > 0.0);
}

}  // namespace

std::vector<double> forward_backward_difference(const SparseMatchSet& fwd, const SparseMatchSet& bwd,
                                                const SeedGrid& grid) {
  if (bwd.matches.size() != grid.size()) throw SizeError("backward matches do not cover the seed grid");
  std::vector<double> diff(fwd.matches.size());
  auto lattice = [&](int c, int r) -> const SparseMatch& {
    return bwd.matches[static_cast<std::size_t>(r * grid.cols + c)];
  };
  for (std::size_t k = 0; k < fwd.matches.size(); ++k) {
    const SparseMatch& m = fwd.matches[k];
    const double gx = std::clamp((m.x + m.u - grid.offset) / grid.spacing, 0.0, grid.cols - 1.0);
    const double gy = std::clamp((m.y + m.v - grid.offset) / grid.spacing, 0.0, grid.rows - 1.0);
    const int c0 = static_cast<int>(gx);
    const int r0 = static_cast<int>(gy);
    const int c1 = std::min(c0 + 1, grid.cols - 1);
    const int r1 = std::min(r0 + 1, grid.rows - 1);
    const double fx = gx - c0;
    const double fy = gy - r0;
    auto interp = [&](auto field) {
      const double top = (1 - fx) * field(lattice(c0, r0)) + fx * field(lattice(c1, r0));
      const double bottom = (1 - fx) * field(lattice(c0, r1)) + fx * field(lattice(c1, r1));
      return (1 - fy) * top + fy * bottom;
    };
    const double bu = interp([](const SparseMatch& b) { return b.u; });
    const double bv = interp([](const SparseMatch& b) { return b.v; });
    diff[k] = std::abs(m.u + bu) + std::abs(m.v + bv);
  }
  return diff;
}

std::vector<double> flow_confidence(const SparseMatchSet& fwd, const SparseMatchSet& bwd, const SeedGrid& grid,
                                    double sigma_c) {
  auto conf = forward_backward_difference(fwd, bwd, grid);
  for (double& c : conf) c = std::exp(-c / sigma_c);
  return conf;
}

CpmPairResult cpm_match_pair(const CpmFrame& f1, const CpmFrame& f2, const CpmParams& params, std::uint64_t stream) {
  if (f1.width != f2.width || f1.height != f2.height) throw SizeError("view pair differs in size");
  const SeedGrid grid = make_seed_grid(f1.width, f1.height, params.seed_spacing);
  CpmPairResult result;
  const std::uint64_t pair_seed = mix_seed(params.rng_seed, stream);
  // The two directions are independent; run them side by side.
  parallel_for(2, [&](std::ptrdiff_t dir) {
    if (dir == 0)
      result.forward = match_direction(f1, f2, grid, params, mix_seed(pair_seed, 0));
    else
      result.backward = match_direction(f2, f1, grid, params, mix_seed(pair_seed, 1));
  });
  const auto diff = forward_backward_difference(result.forward, result.backward, grid);
  result.filtered.width = f1.width;
  result.filtered.height = f1.height;
  result.filtered.rng_seed = params.rng_seed;
  for (std::size_t k = 0; k < diff.size(); ++k) {
    if (!(diff[k] <= params.tau_fb)) continue;
    SparseMatch m = result.forward.matches[k];
    if (pinned_to_frame(m, f1.width, f1.height)) continue;
    m.confidence = std::exp(-diff[k] / params.sigma_c);
    result.filtered.matches.push_back(m);
  }
  return result;
}

SparseMatchSet cpm_match(const Image& i1, const Image& i2, const CpmParams& params, std::uint64_t stream) {
  if (!i1.same_size(i2)) throw SizeError("view pair differs in size");
  const CpmFrame f1 = make_cpm_frame(i1, params);
  const CpmFrame f2 = make_cpm_frame(i2, params);
  return cpm_match_pair(f1, f2, params, stream).filtered;
}

Image confidence_map(const SparseMatchSet& matches) {
  Image map(matches.width, matches.height, 1);
  for (const auto& m : matches.matches) map.at(m.x, m.y) = m.confidence;
  return map;
}

void write_matches(std::ostream& out, const SparseMatchSet& matches) {
  out.precision(9);
  for (const auto& m : matches.matches)
    out << m.x << ' ' << m.y << ' ' << m.u << ' ' << m.v << ' ' << m.cost << ' ' << m.confidence << '\n';
}

}  // namespace lfdepth
