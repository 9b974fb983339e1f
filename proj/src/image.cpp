#include "lfdepth/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lfdepth/errors.hpp"

namespace lfdepth {

Image::Image(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
  if (width < 0 || height < 0 || channels < 1) throw SizeError("invalid image dimensions");
  data_.assign(pixel_count() * static_cast<std::size_t>(channels), fill);
}

Image::Image(int width, int height, int channels, std::vector<double> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  if (width < 0 || height < 0 || channels < 1) throw SizeError("invalid image dimensions");
  if (data_.size() != pixel_count() * static_cast<std::size_t>(channels))
    throw SizeError("image data length does not match width x height x channels");
}

Image to_gray(const Image& img) {
  Image out(img.width(), img.height(), 1);
  const int c = img.channels();
  const auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    double acc = 0.0;
    for (int k = 0; k < c; ++k) acc += src[i * static_cast<std::size_t>(c) + static_cast<std::size_t>(k)];
    dst[i] = acc / c;
  }
  return out;
}

Image transpose(const Image& img) {
  Image out(img.height(), img.width(), img.channels());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < img.channels(); ++c) out.at(y, x, c) = img.at(x, y, c);
  return out;
}

bool sample_row_linear(const Image& img, double x, int y, int c, double& out) noexcept {
  const int w = img.width();
  if (!(x >= 0.0) || x > static_cast<double>(w - 1)) return false;
  const int x0 = std::min(static_cast<int>(x), w - 1);
  const double fx = x - x0;
  if (fx == 0.0 || x0 + 1 >= w) {
    out = img.at(x0, y, c);
    return true;
  }
  out = (1.0 - fx) * img.at(x0, y, c) + fx * img.at(x0 + 1, y, c);
  return true;
}

double sample_bilinear_clamped(const Image& img, double x, double y, int c) noexcept {
  x = std::clamp(x, 0.0, static_cast<double>(img.width() - 1));
  y = std::clamp(y, 0.0, static_cast<double>(img.height() - 1));
  const int x0 = static_cast<int>(x);
  const int y0 = static_cast<int>(y);
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = (1.0 - fx) * img.at(x0, y0, c) + fx * img.at(x1, y0, c);
  const double bottom = (1.0 - fx) * img.at(x0, y1, c) + fx * img.at(x1, y1, c);
  return (1.0 - fy) * top + fy * bottom;
}

bool all_finite(const Image& img) noexcept {
  return std::all_of(img.data().begin(), img.data().end(), [](double v) { return std::isfinite(v); });
}

}  // namespace lfdepth
