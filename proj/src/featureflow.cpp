#include "lfdepth/featureflow.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "lfdepth/errors.hpp"
#include "lfdepth/parallel.hpp"

namespace lfdepth {

namespace {

struct SeedPlanes {
  Image num;
  Image den;
  double mean = 0.0;  // confidence-weighted mean seed value
};

SeedPlanes embed_seeds(const SparseMatchSet& sparse, int width, int height) {
  SeedPlanes p{Image(width, height, 1), Image(width, height, 1), 0.0};
  double wsum = 0.0, swsum = 0.0;
  for (const auto& m : sparse.matches) {
    if (!(m.confidence > 0.0)) continue;
    p.num.at(m.x, m.y) += m.u * m.confidence;
    p.den.at(m.x, m.y) += m.confidence;
    wsum += m.confidence;
    swsum += m.u * m.confidence;
  }
  if (!(wsum > 0.0)) throw NoDataError("no seed with positive confidence to densify");
  p.mean = swsum / wsum;
  return p;
}

}  // namespace

DenseFlow densify_spatial(const SparseMatchSet& sparse, const Image& guide, const DtParams& params) {
  params.validate();
  if (sparse.width != guide.width() || sparse.height != guide.height())
    throw SizeError("sparse matches and guide differ in size");
  SeedPlanes p = embed_seeds(sparse, guide.width(), guide.height());
  dt_filter_2d(p.num, p.den, guide, params.sigma_s, params.sigma_r, params.iterations);
  return {normalize_planes(p.num, p.den, p.mean), p.den};
}

void angular_pass(std::vector<Image>& num, std::vector<Image>& den, const std::vector<Image>& paths,
                  const std::vector<Image>& guide, double sigma, double ratio, double flow_ratio) {
  const int count = static_cast<int>(num.size());
  if (count < 2) return;
  const int w = num.front().width();
  const int h = num.front().height();
  const int ch = guide.front().channels();

  if (ch > 4) throw SizeError("angular pass supports at most 4 guide channels");

  // Feedback between (n, x, y) and its neighbour view sampled at (px, y);
  // 0 when the path leaves the image.
  auto coupling = [&](int n, int neighbour, double px, int x, int y) {
    std::array<double, 4> g{};
    for (int c = 0; c < ch; ++c)
      if (!sample_row_linear(guide[static_cast<std::size_t>(neighbour)], px, y, c, g[static_cast<std::size_t>(c)]))
        return 0.0;
    const auto self = guide[static_cast<std::size_t>(n)].pixel(x, y);
    double distance = domain_distance(self, std::span<const double>(g.data(), self.size()), ratio);
    if (flow_ratio > 0.0) {
      // A scene point keeps its disparity along the path; disagreement marks
      // an occlusion or a bad estimate.
      double f = 0.0;
      if (!sample_row_linear(paths[static_cast<std::size_t>(neighbour)], px, y, 0, f)) return 0.0;
      distance += flow_ratio * std::abs(paths[static_cast<std::size_t>(n)].at(x, y) - f);
    }
    return dt_feedback(sigma, distance);
  };

  // Forward: n reads the already-filtered n-1 at x - f_n(x).
  for (int n = 1; n < count; ++n) {
    Image& N = num[static_cast<std::size_t>(n)];
    Image& D = den[static_cast<std::size_t>(n)];
    const Image& prevN = num[static_cast<std::size_t>(n - 1)];
    const Image& prevD = den[static_cast<std::size_t>(n - 1)];
    const Image& path = paths[static_cast<std::size_t>(n)];
    parallel_for(h, [&](std::ptrdiff_t yy) {
      const int y = static_cast<int>(yy);
      for (int x = 0; x < w; ++x) {
        const double px = x - path.at(x, y);
        const double a = coupling(n, n - 1, px, x, y);
        double pn = 0.0, pd = 0.0;
        if (a == 0.0 || !sample_row_linear(prevN, px, y, 0, pn) || !sample_row_linear(prevD, px, y, 0, pd)) continue;
        N.at(x, y) = (1.0 - a) * N.at(x, y) + a * pn;
        D.at(x, y) = (1.0 - a) * D.at(x, y) + a * pd;
      }
    });
  }
  // Backward: n reads the filtered n+1 at x + f_n(x).
  for (int n = count - 2; n >= 0; --n) {
    Image& N = num[static_cast<std::size_t>(n)];
    Image& D = den[static_cast<std::size_t>(n)];
    const Image& nextN = num[static_cast<std::size_t>(n + 1)];
    const Image& nextD = den[static_cast<std::size_t>(n + 1)];
    const Image& path = paths[static_cast<std::size_t>(n)];
    parallel_for(h, [&](std::ptrdiff_t yy) {
      const int y = static_cast<int>(yy);
      for (int x = 0; x < w; ++x) {
        const double px = x + path.at(x, y);
        const double a = coupling(n, n + 1, px, x, y);
        double pn = 0.0, pd = 0.0;
        if (a == 0.0 || !sample_row_linear(nextN, px, y, 0, pn) || !sample_row_linear(nextD, px, y, 0, pd)) continue;
        N.at(x, y) = (1.0 - a) * N.at(x, y) + a * pn;
        D.at(x, y) = (1.0 - a) * D.at(x, y) + a * pd;
      }
    });
  }
}

FlowVolume propagate_angular(const FlowVolume& vol, const DtParams& params) {
  params.validate();
  if (vol.guide.size() != vol.flows.size() + 1 || vol.confidences.size() != vol.flows.size())
    throw SizeError("flow volume needs N-1 flows, N-1 confidences and N guide views");
  FlowVolume out = vol;
  if (vol.size() < 2) return out;
  std::vector<Image> num, den;
  for (int n = 0; n < vol.size(); ++n) {
    const Image& f = vol.flows[static_cast<std::size_t>(n)];
    const Image& c = vol.confidences[static_cast<std::size_t>(n)];
    Image nn(f.width(), f.height(), 1);
    for (std::size_t i = 0; i < nn.pixel_count(); ++i) nn.data()[i] = f.data()[i] * c.data()[i];
    num.push_back(std::move(nn));
    den.push_back(c);
  }
  angular_pass(num, den, vol.flows, vol.guide, params.sigma_a, params.sigma_a / params.sigma_r,
               params.sigma_a / params.sigma_d);
  for (int n = 0; n < vol.size(); ++n) {
    const auto i = static_cast<std::size_t>(n);
    Image f = vol.flows[i];
    for (std::size_t p = 0; p < f.pixel_count(); ++p)
      if (den[i].data()[p] > 0.0) f.data()[p] = num[i].data()[p] / den[i].data()[p];
    out.flows[i] = std::move(f);
    out.confidences[i] = std::move(den[i]);
  }
  return out;
}

FlowVolume feature_flow(const SpatioAngularVolume& volume, std::span<const SparseMatchSet> sparse,
                        const DtParams& params) {
  params.validate();
  const int pairs = volume.size() - 1;
  if (pairs < 1) throw SizeError("volume needs at least two views");
  if (static_cast<int>(sparse.size()) != pairs) throw SizeError("need one sparse match set per view pair");

  FlowVolume vol;
  vol.guide = volume.images;
  std::vector<SeedPlanes> seeds;
  for (int n = 0; n < pairs; ++n) {
    const auto i = static_cast<std::size_t>(n);
    seeds.push_back(embed_seeds(sparse[i], volume.images[i].width(), volume.images[i].height()));
    const DenseFlow dense = densify_spatial(sparse[i], volume.images[i], params);
    vol.flows.push_back(dense.flow);
    vol.confidences.push_back(dense.confidence);
  }

  std::vector<Image> num, den;
  for (const auto& s : seeds) {
    num.push_back(s.num);
    den.push_back(s.den);
  }
  const double spatial_ratio = params.sigma_s / params.sigma_r;
  const double angular_ratio = params.sigma_a / params.sigma_r;
  const double flow_ratio = params.sigma_a / params.sigma_d;
  for (int i = 1; i <= params.iterations; ++i) {
    const double sigma_h = iteration_sigma(params.sigma_s, i, params.iterations);
    const double sigma_a = iteration_sigma(params.sigma_a, i, params.iterations);
    for (int n = 0; n < pairs; ++n) {
      const auto k = static_cast<std::size_t>(n);
      dt_pass_horizontal(num[k], den[k], vol.guide[k], sigma_h, spatial_ratio);
      dt_pass_vertical(num[k], den[k], vol.guide[k], sigma_h, spatial_ratio);
    }
    angular_pass(num, den, vol.flows, vol.guide, sigma_a, angular_ratio, flow_ratio);
    for (int n = 0; n < pairs; ++n) {
      const auto k = static_cast<std::size_t>(n);
      vol.flows[k] = normalize_planes(num[k], den[k], seeds[k].mean);
    }
  }
  for (int n = 0; n < pairs; ++n) vol.confidences[static_cast<std::size_t>(n)] = den[static_cast<std::size_t>(n)];
  return vol;
}

}  // namespace lfdepth
