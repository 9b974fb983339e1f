#include "lfdepth/domain_transform.hpp"

#include <algorithm>
#include <cmath>

#include "lfdepth/errors.hpp"
#include "lfdepth/parallel.hpp"

namespace lfdepth {

void DtParams::validate() const {
  if (!(sigma_s > 0.0) || !(sigma_r > 0.0) || !(sigma_a > 0.0) || !(sigma_d > 0.0) || iterations < 1)
    throw SizeError("domain transform widths must be positive and iterations >= 1");
}

double iteration_sigma(double sigma, int i, int n) {
  return sigma * std::sqrt(3.0) * std::pow(2.0, n - i) / std::sqrt(std::pow(4.0, n) - 1.0);
}

double domain_distance(std::span<const double> g0, std::span<const double> g1, double ratio) noexcept {
  double l1 = 0.0;
  for (std::size_t c = 0; c < g0.size(); ++c) l1 += std::abs(g0[c] - g1[c]);
  return 1.0 + ratio * l1;
}

std::vector<double> domain_transform_1d(std::span<const double> signal, std::span<const double> weights,
                                        std::span<const double> guide, int channels, double sigma_s,
                                        double sigma_r) {
  const std::size_t n = signal.size();
  if (n == 0 || weights.size() != n || guide.size() != n * static_cast<std::size_t>(channels))
    throw SizeError("domain transform inputs differ in length");
  if (!(sigma_s > 0.0) || !(sigma_r > 0.0)) throw SizeError("domain transform widths must be positive");
  if (std::none_of(weights.begin(), weights.end(), [](double w) { return w > 0.0; }))
    throw NoDataError("domain transform: all weights are zero");

  const double ratio = sigma_s / sigma_r;
  const auto ch = static_cast<std::size_t>(channels);
  // a[i] couples sample i with sample i-1.
  std::vector<double> a(n, 0.0);
  for (std::size_t i = 1; i < n; ++i)
    a[i] = dt_feedback(sigma_s, domain_distance(guide.subspan((i - 1) * ch, ch), guide.subspan(i * ch, ch), ratio));

  std::vector<double> num(n), den(n);
  for (std::size_t i = 0; i < n; ++i) {
    num[i] = signal[i] * weights[i];
    den[i] = weights[i];
  }
  for (std::size_t i = 1; i < n; ++i) {
    num[i] = (1.0 - a[i]) * num[i] + a[i] * num[i - 1];
    den[i] = (1.0 - a[i]) * den[i] + a[i] * den[i - 1];
  }
  for (std::size_t i = n - 1; i-- > 0;) {
    num[i] = (1.0 - a[i + 1]) * num[i] + a[i + 1] * num[i + 1];
    den[i] = (1.0 - a[i + 1]) * den[i] + a[i + 1] * den[i + 1];
  }

  double wsum = 0.0, swsum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    wsum += weights[i];
    swsum += weights[i] * signal[i];
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = den[i] > 0.0 ? num[i] / den[i] : swsum / wsum;
  return out;
}

void dt_pass_horizontal(Image& num, Image& den, const Image& guide, double sigma_h, double ratio) {
  const int w = guide.width();
  const int h = guide.height();
  parallel_for(h, [&](std::ptrdiff_t yy) {
    const int y = static_cast<int>(yy);
    std::vector<double> a(static_cast<std::size_t>(w), 0.0);
    for (int x = 1; x < w; ++x)
      a[static_cast<std::size_t>(x)] = dt_feedback(sigma_h, domain_distance(guide.pixel(x - 1, y), guide.pixel(x, y), ratio));
    auto n = num.row(y);
    auto d = den.row(y);
    for (int x = 1; x < w; ++x) {
      const double ax = a[static_cast<std::size_t>(x)];
      n[x] = (1.0 - ax) * n[x] + ax * n[x - 1];
      d[x] = (1.0 - ax) * d[x] + ax * d[x - 1];
    }
    for (int x = w - 2; x >= 0; --x) {
      const double ax = a[static_cast<std::size_t>(x + 1)];
      n[x] = (1.0 - ax) * n[x] + ax * n[x + 1];
      d[x] = (1.0 - ax) * d[x] + ax * d[x + 1];
    }
  });
}

void dt_pass_vertical(Image& num, Image& den, const Image& guide, double sigma_h, double ratio) {
  const int w = guide.width();
  const int h = guide.height();
  // Blocks of columns; each column's recursion is independent.
  constexpr int kBlock = 32;
  const int blocks = (w + kBlock - 1) / kBlock;
  parallel_for(blocks, [&](std::ptrdiff_t b) {
    const int x0 = static_cast<int>(b) * kBlock;
    const int x1 = std::min(w, x0 + kBlock);
    const int bw = x1 - x0;
    std::vector<double> a(static_cast<std::size_t>(bw) * static_cast<std::size_t>(h), 0.0);
    for (int y = 1; y < h; ++y)
      for (int x = x0; x < x1; ++x)
        a[static_cast<std::size_t>(y) * bw + (x - x0)] =
            dt_feedback(sigma_h, domain_distance(guide.pixel(x, y - 1), guide.pixel(x, y), ratio));
    for (int y = 1; y < h; ++y)
      for (int x = x0; x < x1; ++x) {
        const double ay = a[static_cast<std::size_t>(y) * bw + (x - x0)];
        num.at(x, y) = (1.0 - ay) * num.at(x, y) + ay * num.at(x, y - 1);
        den.at(x, y) = (1.0 - ay) * den.at(x, y) + ay * den.at(x, y - 1);
      }
    for (int y = h - 2; y >= 0; --y)
      for (int x = x0; x < x1; ++x) {
        const double ay = a[static_cast<std::size_t>(y + 1) * bw + (x - x0)];
        num.at(x, y) = (1.0 - ay) * num.at(x, y) + ay * num.at(x, y + 1);
        den.at(x, y) = (1.0 - ay) * den.at(x, y) + ay * den.at(x, y + 1);
      }
  });
}

void dt_filter_2d(Image& num, Image& den, const Image& guide, double sigma_s, double sigma_r, int iterations) {
  const double ratio = sigma_s / sigma_r;
  for (int i = 1; i <= iterations; ++i) {
    const double sigma_h = iteration_sigma(sigma_s, i, iterations);
    dt_pass_horizontal(num, den, guide, sigma_h, ratio);
    dt_pass_vertical(num, den, guide, sigma_h, ratio);
  }
}

Image normalize_planes(const Image& num, const Image& den, double fallback) {
  Image out(num.width(), num.height(), 1);
  for (std::size_t i = 0; i < out.pixel_count(); ++i) {
    const double d = den.data()[i];
    out.data()[i] = d > 0.0 ? num.data()[i] / d : fallback;
  }
  return out;
}

}  // namespace lfdepth
