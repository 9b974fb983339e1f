#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lfdepth/image.hpp"

namespace lfdepth {

// Dense SIFT-like descriptor: cells x cells spatial cells of cell_size px,
// each an orientation histogram with `bins` bins. The support is a square of
// cells * cell_size pixels centred on the pixel.
struct DescriptorParams {
  int cell_size = 4;
  int cells = 4;
  int bins = 8;
  double clamp = 0.2;
  // Gaussian window sigma as a fraction of the support width.
  double window_sigma = 0.5;

  int dim() const noexcept { return cells * cells * bins; }
  int support() const noexcept { return cells * cell_size; }
  int radius() const noexcept { return support() / 2; }
  // Throws SizeError on non-positive sizes.
  void validate() const;
};

class DescriptorField {
 public:
  DescriptorField() = default;
  DescriptorField(int width, int height, int dim);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int dim() const noexcept { return dim_; }

  std::span<const float> at(int x, int y) const noexcept {
    return std::span<const float>(data_).subspan(offset(x, y), static_cast<std::size_t>(dim_));
  }
  std::span<float> at(int x, int y) noexcept {
    return std::span<float>(data_).subspan(offset(x, y), static_cast<std::size_t>(dim_));
  }
  std::span<const float> data() const noexcept { return data_; }

 private:
  std::size_t offset(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) *
           static_cast<std::size_t>(dim_);
  }
  int width_ = 0;
  int height_ = 0;
  int dim_ = 0;
  std::vector<float> data_;
};

// One descriptor per pixel, rows computed in parallel. Throws SizeError when
// the image is smaller than the descriptor support.
DescriptorField compute_descriptors(const Image& img, const DescriptorParams& params = {});

// L2-normalise, clamp components at `clamp`, renormalise. A raw histogram
// with negligible energy becomes the zero vector.
void normalize_descriptor(std::span<double> hist, double clamp);

}  // namespace lfdepth
