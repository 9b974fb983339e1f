#pragma once

#include "lfdepth/descriptor.hpp"
#include "lfdepth/image.hpp"

// Straightforward single-threaded versions of the parallel kernels. They are
// kept for parity tests and as the baseline in the kernel benchmarks.
namespace lfdepth::reference {

// Direct 2D windowed sum per pixel, no separable stages.
DescriptorField compute_descriptors(const Image& img, const DescriptorParams& params = {});

// Same schedule as lfdepth::dt_filter_2d, one row or column at a time.
void dt_filter_2d(Image& num, Image& den, const Image& guide, double sigma_s, double sigma_r, int iterations);

}  // namespace lfdepth::reference
