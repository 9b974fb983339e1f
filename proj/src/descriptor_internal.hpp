#pragma once

#include <vector>

#include "lfdepth/descriptor.hpp"
#include "lfdepth/image.hpp"

namespace lfdepth::detail {

// Raw histograms with squared norm at or below this are textureless.
inline constexpr double kMinDescriptorEnergy = 1e-18;

// Per-pixel gradient magnitude soft-assigned to orientation bins, one plane
// per bin. Gradients are central differences on the gray image with
// replicated borders.
std::vector<Image> orientation_planes(const Image& img, int bins);

// 1D Gaussian window over the support, indexed by offset + radius.
std::vector<double> window_taps(const DescriptorParams& p);

}  // namespace lfdepth::detail
