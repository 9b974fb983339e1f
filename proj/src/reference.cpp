#include "lfdepth/reference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "lfdepth/domain_transform.hpp"
#include "lfdepth/errors.hpp"

namespace lfdepth::reference {

DescriptorField compute_descriptors(const Image& img, const DescriptorParams& params) {
  params.validate();
  if (img.width() < params.support() || img.height() < params.support())
    throw SizeError("image is smaller than the descriptor support");
  const Image gray = to_gray(img);
  const int w = gray.width();
  const int h = gray.height();
  const int r = params.radius();
  const int support = params.support();
  const double sigma = params.window_sigma * support;
  DescriptorField field(w, h, params.dim());
  std::vector<double> hist(static_cast<std::size_t>(params.dim()));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      std::fill(hist.begin(), hist.end(), 0.0);
      for (int i = 0; i < support; ++i)
        for (int j = 0; j < support; ++j) {
          const int sx = std::clamp(x + j - r, 0, w - 1);
          const int sy = std::clamp(y + i - r, 0, h - 1);
          const double gx = 0.5 * (gray.at(std::min(sx + 1, w - 1), sy) - gray.at(std::max(sx - 1, 0), sy));
          const double gy = 0.5 * (gray.at(sx, std::min(sy + 1, h - 1)) - gray.at(sx, std::max(sy - 1, 0)));
          const double mag = std::hypot(gx, gy);
          if (mag == 0.0) continue;
          const double ox = j - r + 0.5;
          const double oy = i - r + 0.5;
          const double wgt = std::exp(-(ox * ox + oy * oy) / (2.0 * sigma * sigma));
          double pos = std::atan2(gy, gx) * params.bins / (2.0 * std::numbers::pi);
          if (pos < 0.0) pos += params.bins;
          int b0 = static_cast<int>(pos);
          const double frac = pos - b0;
          b0 %= params.bins;
          const int b1 = (b0 + 1) % params.bins;
          const int cell = (i / params.cell_size) * params.cells + j / params.cell_size;
          hist[static_cast<std::size_t>(cell * params.bins + b0)] += wgt * mag * (1.0 - frac);
          hist[static_cast<std::size_t>(cell * params.bins + b1)] += wgt * mag * frac;
        }
      normalize_descriptor(hist, params.clamp);
      auto dst = field.at(x, y);
      for (std::size_t k = 0; k < hist.size(); ++k) dst[k] = static_cast<float>(hist[k]);
    }
  return field;
}

namespace {

void recurse(std::vector<double*>& n, std::vector<double*>& d, const std::vector<double>& a) {
  const std::size_t len = n.size();
  for (std::size_t i = 1; i < len; ++i) {
    *n[i] = (1.0 - a[i]) * *n[i] + a[i] * *n[i - 1];
    *d[i] = (1.0 - a[i]) * *d[i] + a[i] * *d[i - 1];
  }
  for (std::size_t i = len - 1; i-- > 0;) {
    *n[i] = (1.0 - a[i + 1]) * *n[i] + a[i + 1] * *n[i + 1];
    *d[i] = (1.0 - a[i + 1]) * *d[i] + a[i + 1] * *d[i + 1];
  }
}

}  // namespace

void dt_filter_2d(Image& num, Image& den, const Image& guide, double sigma_s, double sigma_r, int iterations) {
  const double ratio = sigma_s / sigma_r;
  const int w = guide.width();
  const int h = guide.height();
  for (int it = 1; it <= iterations; ++it) {
    const double sh = iteration_sigma(sigma_s, it, iterations);
    for (int y = 0; y < h; ++y) {
      std::vector<double*> n, d;
      std::vector<double> a(static_cast<std::size_t>(w), 0.0);
      for (int x = 0; x < w; ++x) {
        n.push_back(&num.at(x, y));
        d.push_back(&den.at(x, y));
        if (x > 0) a[static_cast<std::size_t>(x)] = dt_feedback(sh, domain_distance(guide.pixel(x - 1, y), guide.pixel(x, y), ratio));
      }
      recurse(n, d, a);
    }
    for (int x = 0; x < w; ++x) {
      std::vector<double*> n, d;
      std::vector<double> a(static_cast<std::size_t>(h), 0.0);
      for (int y = 0; y < h; ++y) {
        n.push_back(&num.at(x, y));
        d.push_back(&den.at(x, y));
        if (y > 0) a[static_cast<std::size_t>(y)] = dt_feedback(sh, domain_distance(guide.pixel(x, y - 1), guide.pixel(x, y), ratio));
      }
      recurse(n, d, a);
    }
  }
}

}  // namespace lfdepth::reference
