#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lfdepth {

// Row-major interleaved raster of doubles. Color views hold 3 channels in
// [0,1]; scalar maps (flows, weights) hold 1 channel of arbitrary values.
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, double fill = 0.0);
  Image(int width, int height, int channels, std::vector<double> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  bool empty() const noexcept { return data_.empty(); }

  double& at(int x, int y, int c = 0) noexcept { return data_[index(x, y, c)]; }
  double at(int x, int y, int c = 0) const noexcept { return data_[index(x, y, c)]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> row(int y) noexcept {
    return std::span<double>(data_).subspan(index(0, y, 0), row_stride());
  }
  std::span<const double> row(int y) const noexcept {
    return std::span<const double>(data_).subspan(index(0, y, 0), row_stride());
  }
  std::span<const double> pixel(int x, int y) const noexcept {
    return std::span<const double>(data_).subspan(index(x, y, 0), channels_);
  }

  bool same_shape(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }
  bool same_size(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }
  bool operator==(const Image&) const = default;

 private:
  std::size_t row_stride() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(channels_);
  }
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(c);
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

// Mean of the channels.
Image to_gray(const Image& img);

// Swaps the x and y axes; column-axis processing runs on transposed views.
Image transpose(const Image& img);

// Linear interpolation along x only, at integer row y. Returns false when x
// falls outside [0, width-1].
bool sample_row_linear(const Image& img, double x, int y, int c, double& out) noexcept;

// Bilinear sample with coordinates clamped to the image.
double sample_bilinear_clamped(const Image& img, double x, double y, int c) noexcept;

bool all_finite(const Image& img) noexcept;

}  // namespace lfdepth
