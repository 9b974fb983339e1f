#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "lfdepth/image.hpp"

namespace lfdepth {

struct DtParams {
  double sigma_s = 30.0;  // spatial kernel width, pixels
  double sigma_r = 0.08;  // range kernel width, color units
  double sigma_a = 2.0;   // angular kernel width, views
  // Range width for disparity change along angular paths, pixels.
  double sigma_d = 0.25;
  int iterations = 3;

  // Throws SizeError unless every width is positive and iterations >= 1.
  void validate() const;
};

// Kernel width of pass i (1-based) out of n so that the n passes together
// have standard deviation sigma.
double iteration_sigma(double sigma, int i, int n);

// Feedback coefficient a^d of the recursive filter for domain distance d.
inline double dt_feedback(double sigma_h, double distance);

// Domain distance between adjacent samples: 1 + ratio * |g_i - g_j|_1.
double domain_distance(std::span<const double> g0, std::span<const double> g1, double ratio) noexcept;

// Normalized-convolution recursive domain transform of one sequence: the
// numerator signal*weight and the denominator weight are filtered by one
// forward and one backward pass with identical coefficients, then divided.
// guide holds signal.size() samples of `channels` values each. Throws
// NoDataError when all weights are zero.
std::vector<double> domain_transform_1d(std::span<const double> signal, std::span<const double> weights,
                                        std::span<const double> guide, int channels, double sigma_s,
                                        double sigma_r);

// In-place recursive passes over numerator/denominator planes (1 channel,
// same size as guide). Rows (columns) are filtered independently in parallel.
void dt_pass_horizontal(Image& num, Image& den, const Image& guide, double sigma_h, double ratio);
void dt_pass_vertical(Image& num, Image& den, const Image& guide, double sigma_h, double ratio);

// `iterations` alternating horizontal/vertical passes with the scheduled widths.
void dt_filter_2d(Image& num, Image& den, const Image& guide, double sigma_s, double sigma_r, int iterations);

// num / den; where den is zero the fallback value is used.
Image normalize_planes(const Image& num, const Image& den, double fallback);

inline double dt_feedback(double sigma_h, double distance) {
  return std::exp(-1.4142135623730951 * distance / sigma_h);
}

}  // namespace lfdepth
