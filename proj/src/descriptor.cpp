#include "lfdepth/descriptor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lfdepth/errors.hpp"
#include "lfdepth/parallel.hpp"
#include "descriptor_internal.hpp"

namespace lfdepth {

void DescriptorParams::validate() const {
  if (cell_size < 1 || cells < 1 || bins < 1 || !(clamp > 0.0) || !(window_sigma > 0.0))
    throw SizeError("invalid descriptor parameters");
}

DescriptorField::DescriptorField(int width, int height, int dim)
    : width_(width),
      height_(height),
      dim_(dim),
      data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * static_cast<std::size_t>(dim),
            0.0f) {}

void normalize_descriptor(std::span<double> hist, double clamp) {
  double norm2 = 0.0;
  for (double v : hist) norm2 += v * v;
  if (norm2 <= detail::kMinDescriptorEnergy) {
    std::fill(hist.begin(), hist.end(), 0.0);
    return;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  norm2 = 0.0;
  for (double& v : hist) {
    v = std::min(v * inv, clamp);
    norm2 += v * v;
  }
  const double inv2 = 1.0 / std::sqrt(norm2);
  for (double& v : hist) v *= inv2;
}

namespace detail {

std::vector<Image> orientation_planes(const Image& img, int bins) {
  const Image gray = to_gray(img);
  const int w = gray.width();
  const int h = gray.height();
  std::vector<Image> planes(static_cast<std::size_t>(bins), Image(w, h, 1));
  const double bin_scale = bins / (2.0 * std::numbers::pi);
  parallel_for(h, [&](std::ptrdiff_t yy) {
    const int y = static_cast<int>(yy);
    for (int x = 0; x < w; ++x) {
      const double gx = 0.5 * (gray.at(std::min(x + 1, w - 1), y) - gray.at(std::max(x - 1, 0), y));
      const double gy = 0.5 * (gray.at(x, std::min(y + 1, h - 1)) - gray.at(x, std::max(y - 1, 0)));
      const double mag = std::sqrt(gx * gx + gy * gy);
      if (mag == 0.0) continue;
      double pos = std::atan2(gy, gx) * bin_scale;
      if (pos < 0.0) pos += bins;
      int b0 = static_cast<int>(pos);
      const double frac = pos - b0;
      b0 %= bins;
      const int b1 = (b0 + 1) % bins;
      planes[static_cast<std::size_t>(b0)].at(x, y) += mag * (1.0 - frac);
      planes[static_cast<std::size_t>(b1)].at(x, y) += mag * frac;
    }
  });
  return planes;
}

std::vector<double> window_taps(const DescriptorParams& p) {
  const int support = p.support();
  const double sigma = p.window_sigma * support;
  std::vector<double> taps(static_cast<std::size_t>(support));
  for (int i = 0; i < support; ++i) {
    const double o = (i - p.radius()) + 0.5;
    taps[static_cast<std::size_t>(i)] = std::exp(-(o * o) / (2.0 * sigma * sigma));
  }
  return taps;
}

}  // namespace detail

DescriptorField compute_descriptors(const Image& img, const DescriptorParams& params) {
  params.validate();
  if (img.channels() < 1 || img.width() < params.support() || img.height() < params.support())
    throw SizeError("image " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                    " is smaller than the descriptor support of " + std::to_string(params.support()) + " px");
  const int w = img.width();
  const int h = img.height();
  const int bins = params.bins;
  const int cells = params.cells;
  const int cs = params.cell_size;
  const int r = params.radius();
  const auto planes = detail::orientation_planes(img, bins);
  const auto taps = detail::window_taps(params);

  // Horizontal stage: for every bin and cell column, the windowed sum over
  // that cell's columns. Layout [bin][cell_col] planes of w x h.
  std::vector<Image> horiz(static_cast<std::size_t>(bins * cells), Image(w, h, 1));
  parallel_for(h, [&](std::ptrdiff_t yy) {
    const int y = static_cast<int>(yy);
    for (int b = 0; b < bins; ++b) {
      const Image& plane = planes[static_cast<std::size_t>(b)];
      for (int j = 0; j < cells; ++j) {
        Image& out = horiz[static_cast<std::size_t>(b * cells + j)];
        for (int x = 0; x < w; ++x) {
          double acc = 0.0;
          for (int d = 0; d < cs; ++d) {
            const int tap = j * cs + d;
            const int sx = std::clamp(x + tap - r, 0, w - 1);
            acc += taps[static_cast<std::size_t>(tap)] * plane.at(sx, y);
          }
          out.at(x, y) = acc;
        }
      }
    }
  });

  DescriptorField field(w, h, params.dim());
  parallel_for(h, [&](std::ptrdiff_t yy) {
    const int y = static_cast<int>(yy);
    std::vector<double> hist(static_cast<std::size_t>(params.dim()));
    for (int x = 0; x < w; ++x) {
      for (int i = 0; i < cells; ++i) {
        for (int j = 0; j < cells; ++j) {
          for (int b = 0; b < bins; ++b) {
            const Image& src = horiz[static_cast<std::size_t>(b * cells + j)];
            double acc = 0.0;
            for (int d = 0; d < cs; ++d) {
              const int tap = i * cs + d;
              const int sy = std::clamp(y + tap - r, 0, h - 1);
              acc += taps[static_cast<std::size_t>(tap)] * src.at(x, sy);
            }
            hist[static_cast<std::size_t>((i * cells + j) * bins + b)] = acc;
          }
        }
      }
      normalize_descriptor(hist, params.clamp);
      auto dst = field.at(x, y);
      for (std::size_t k = 0; k < hist.size(); ++k) dst[k] = static_cast<float>(hist[k]);
    }
  });
  return field;
}

}  // namespace lfdepth
