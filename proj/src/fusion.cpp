#include "lfdepth/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lfdepth/domain_transform.hpp"
#include "lfdepth/errors.hpp"
#include "lfdepth/parallel.hpp"

namespace lfdepth {

void EstimateStack::append(EstimateStack&& other) {
  for (auto& m : other.maps) maps.push_back(std::move(m));
  for (auto& w : other.weights) weights.push_back(std::move(w));
  for (auto& p : other.provenance) provenance.push_back(p);
}

EstimateStack register_to_center(const FlowVolume& flows, int center_index, Axis axis, int fixed_index) {
  const int count = flows.size();
  if (count < 1) throw SizeError("flow volume is empty");
  if (center_index < 0 || center_index > count) throw IndexError("center index outside the volume");
  const int w = flows.flows.front().width();
  const int h = flows.flows.front().height();
  auto flow_at = [&](int k, double x, int y, double& out) {
    return sample_row_linear(flows.flows[static_cast<std::size_t>(k)], x, y, 0, out);
  };

  EstimateStack stack;
  for (int n = 0; n < count; ++n) {
    DisparityMap map(w, h);
    Image weight(w, h, 1);
    parallel_for(h, [&](std::ptrdiff_t yy) {
      const int y = static_cast<int>(yy);
      for (int x = 0; x < w; ++x) {
        double p = x;
        bool ok = true;
        if (n >= center_index) {
          for (int k = center_index; ok && k < n; ++k) {
            double f = 0.0;
            ok = flow_at(k, p, y, f);
            p += f;
          }
        } else {
          for (int k = center_index - 1; ok && k >= n; --k) {
            // Solve q + f_k(q) = p for the position q in view k.
            double f = 0.0;
            ok = flow_at(k + 1 < count ? k + 1 : k, p, y, f);
            double q = p - f;
            for (int it = 0; ok && it < 4; ++it) {
              ok = flow_at(k, q, y, f);
              q = p - f;
            }
            p = q;
          }
        }
        double value = 0.0, conf = 0.0;
        if (ok && flow_at(n, p, y, value) &&
            sample_row_linear(flows.confidences[static_cast<std::size_t>(n)], p, y, 0, conf)) {
          map.set(x, y, value);
          weight.at(x, y) = conf;
        }
      }
    });
    stack.maps.push_back(std::move(map));
    stack.weights.push_back(std::move(weight));
    stack.provenance.push_back({axis, fixed_index, n});
  }
  return stack;
}

namespace {

// Linear sample of a masked map along x (or y when vertical) through the
// fixed other coordinate; falls back to the valid neighbour when only one is.
bool sample_masked(const DisparityMap& map, double pos, int fixed, bool vertical, double& out) {
  const int extent = vertical ? map.height : map.width;
  if (!(pos >= 0.0) || pos > extent - 1) return false;
  const int i0 = std::min(static_cast<int>(pos), extent - 1);
  const int i1 = std::min(i0 + 1, extent - 1);
  const double f = pos - i0;
  auto valid = [&](int i) { return vertical ? map.is_valid(fixed, i) : map.is_valid(i, fixed); };
  auto value = [&](int i) { return vertical ? map.at(fixed, i) : map.at(i, fixed); };
  const bool v0 = valid(i0);
  const bool v1 = valid(i1);
  if (v0 && v1) {
    out = (1.0 - f) * value(i0) + f * value(i1);
  } else if (v0 && f <= 0.5) {
    out = value(i0);
  } else if (v1 && f >= 0.5) {
    out = value(i1);
  } else {
    return false;
  }
  return true;
}

}  // namespace

DisparityMap shift_to_reference(const DisparityMap& map, double steps, bool vertical, Image* weights) {
  if (steps == 0.0) return map;
  DisparityMap out(map.width, map.height);
  Image shifted_weights = weights ? Image(map.width, map.height, 1) : Image();
  parallel_for(map.height, [&](std::ptrdiff_t yy) {
    const int y = static_cast<int>(yy);
    for (int x = 0; x < map.width; ++x) {
      const int fixed = vertical ? x : y;
      const double base = vertical ? y : x;
      double d = 0.0;
      if (!sample_masked(map, base, fixed, vertical, d)) continue;
      bool ok = true;
      for (int it = 0; ok && it < 5; ++it) ok = sample_masked(map, base + d * steps, fixed, vertical, d);
      if (!ok) continue;
      out.set(x, y, d);
      if (weights) {
        const double pos = base + d * steps;
        shifted_weights.at(x, y) = sample_bilinear_clamped(*weights, vertical ? x : pos, vertical ? pos : y, 0);
      }
    }
  });
  if (weights) *weights = std::move(shifted_weights);
  return out;
}

double weighted_median(std::span<const double> values, std::span<const double> weights) {
  if (values.empty()) throw NoDataError("weighted median of an empty set");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b] || (values[a] == values[b] && a < b);
  });
  double total = 0.0;
  for (double w : weights) total += std::max(w, 0.0);
  const bool uniform = !(total > 0.0);
  if (uniform) total = static_cast<double>(values.size());
  const double half = 0.5 * total;
  double cum = 0.0;
  for (std::size_t i : order) {
    cum += uniform ? 1.0 : std::max(weights[i], 0.0);
    if (cum >= half) return values[i];
  }
  return values[order.back()];
}

DisparityMap median_fuse(const EstimateStack& stack) {
  if (stack.maps.empty()) throw NoDataError("median fusion of an empty estimate stack");
  const int w = stack.maps.front().width;
  const int h = stack.maps.front().height;
  for (const auto& m : stack.maps)
    if (m.width != w || m.height != h) throw SizeError("estimates differ in size");
  const std::size_t count = stack.maps.size();

  DisparityMap per_pixel(w, h);
  std::vector<double> lo(per_pixel.values.size()), hi(per_pixel.values.size());
  parallel_for(h, [&](std::ptrdiff_t yy) {
    const int y = static_cast<int>(yy);
    std::vector<double> vals, wts;
    vals.reserve(count);
    wts.reserve(count);
    for (int x = 0; x < w; ++x) {
      vals.clear();
      wts.clear();
      for (std::size_t k = 0; k < count; ++k) {
        if (!stack.maps[k].is_valid(x, y)) continue;
        vals.push_back(stack.maps[k].at(x, y));
        wts.push_back(k < stack.weights.size() ? stack.weights[k].at(x, y) : 1.0);
      }
      if (vals.empty()) continue;
      const std::size_t i = per_pixel.index(x, y);
      per_pixel.set(x, y, weighted_median(vals, wts));
      lo[i] = *std::min_element(vals.begin(), vals.end());
      hi[i] = *std::max_element(vals.begin(), vals.end());
    }
  });

  DisparityMap out(w, h);
  parallel_for(h, [&](std::ptrdiff_t yy) {
    const int y = static_cast<int>(yy);
    std::vector<double> window;
    window.reserve(9);
    for (int x = 0; x < w; ++x) {
      if (!per_pixel.is_valid(x, y)) continue;
      window.clear();
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx;
          const int ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h || !per_pixel.is_valid(nx, ny)) continue;
          window.push_back(per_pixel.at(nx, ny));
        }
      std::sort(window.begin(), window.end());
      const double med = window[(window.size() - 1) / 2];
      const std::size_t i = per_pixel.index(x, y);
      out.set(x, y, std::clamp(med, lo[i], hi[i]));
    }
  });
  return out;
}

void RefineParams::validate() const {
  if (!(lambda >= 0.0) || !(kappa > 0.0) || !(epsilon > 0.0) || fixed_point_iterations < 1 || inner_iterations < 0 ||
      !(tolerance > 0.0) || !(guide_sigma_s > 0.0) || !(guide_sigma_r > 0.0))
    throw SizeError("invalid refinement parameters");
}

std::vector<double> smoothness_weights(const DisparityMap& initial, const Image& guide, const RefineParams& params) {
  const int w = initial.width;
  const int h = initial.height;
  if (guide.width() != w || guide.height() != h) throw SizeError("guide and disparity differ in size");
  Image num(w, h, 1), den(w, h, 1);
  for (std::size_t i = 0; i < initial.values.size(); ++i) {
    if (!initial.valid[i]) continue;
    num.data()[i] = initial.values[i];
    den.data()[i] = 1.0;
  }
  dt_filter_2d(num, den, guide, params.guide_sigma_s, params.guide_sigma_r, 2);
  const Image smooth = normalize_planes(num, den, 0.0);
  std::vector<double> alpha(initial.values.size(), 1.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!initial.is_valid(x, y)) continue;
      double g2 = 0.0;
      if (x + 1 < w && initial.is_valid(x + 1, y)) g2 += std::pow(smooth.at(x + 1, y) - smooth.at(x, y), 2);
      if (y + 1 < h && initial.is_valid(x, y + 1)) g2 += std::pow(smooth.at(x, y + 1) - smooth.at(x, y), 2);
      alpha[initial.index(x, y)] = std::exp(-params.kappa * std::sqrt(g2));
    }
  return alpha;
}

namespace {

double psi(double s2, double eps) { return std::sqrt(s2 + eps * eps); }
double psi_prime(double s2, double eps) { return 0.5 / std::sqrt(s2 + eps * eps); }

double grad2(const DisparityMap& d, int x, int y) {
  double g2 = 0.0;
  const double v = d.at(x, y);
  if (x + 1 < d.width && d.is_valid(x + 1, y)) g2 += (d.at(x + 1, y) - v) * (d.at(x + 1, y) - v);
  if (y + 1 < d.height && d.is_valid(x, y + 1)) g2 += (d.at(x, y + 1) - v) * (d.at(x, y + 1) - v);
  return g2;
}

}  // namespace

double refinement_energy(const DisparityMap& d, const DisparityMap& initial, std::span<const double> alpha,
                         const RefineParams& params) {
  const auto n = static_cast<std::ptrdiff_t>(d.values.size());
  return deterministic_sum(n, [&](std::ptrdiff_t i) {
    const auto k = static_cast<std::size_t>(i);
    if (!d.valid[k]) return 0.0;
    const int x = static_cast<int>(i % d.width);
    const int y = static_cast<int>(i / d.width);
    const double r = d.values[k] - initial.values[k];
    return psi(r * r, params.epsilon) + params.lambda * alpha[k] * psi(grad2(d, x, y), params.epsilon);
  });
}

RefineResult refine_disparity(const DisparityMap& initial, const Image& guide, const RefineParams& params) {
  params.validate();
  RefineResult result;
  result.map = initial;
  const auto alpha = smoothness_weights(initial, guide, params);
  result.energy_before = refinement_energy(initial, initial, alpha, params);
  result.energy_after = result.energy_before;
  if (params.lambda == 0.0) return result;

  const int w = initial.width;
  const int h = initial.height;
  const auto n = static_cast<std::ptrdiff_t>(initial.values.size());
  const auto& valid = initial.valid;
  auto right_ok = [&](std::ptrdiff_t i) { return (i % w) + 1 < w && valid[static_cast<std::size_t>(i + 1)]; };
  auto down_ok = [&](std::ptrdiff_t i) { return i / w + 1 < h && valid[static_cast<std::size_t>(i + w)]; };

  std::vector<double> current = initial.values;
  for (std::size_t i = 0; i < current.size(); ++i)
    if (!valid[i]) current[i] = 0.0;
  const std::vector<double> d0 = current;

  for (int step = 0; step < params.fixed_point_iterations; ++step) {
    // Linearise psi' at the current iterate.
    std::vector<double> data_w(current.size(), 0.0), smooth_w(current.size(), 0.0);
    DisparityMap lag = initial;
    lag.values = current;
    parallel_for(n, [&](std::ptrdiff_t i) {
      const auto k = static_cast<std::size_t>(i);
      if (!valid[k]) return;
      const double r = current[k] - d0[k];
      data_w[k] = psi_prime(r * r, params.epsilon);
      smooth_w[k] = params.lambda * alpha[k] *
                    psi_prime(grad2(lag, static_cast<int>(i % w), static_cast<int>(i / w)), params.epsilon);
    });

    // A x = data_w x + sum over edges (p, q) of smooth_w[p] (x_p - x_q) on both ends.
    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
      parallel_for(n, [&](std::ptrdiff_t i) {
        const auto k = static_cast<std::size_t>(i);
        if (!valid[k]) {
          y[k] = 0.0;
          return;
        }
        double acc = data_w[k] * x[k];
        if (right_ok(i)) acc += smooth_w[k] * (x[k] - x[k + 1]);
        if (down_ok(i)) acc += smooth_w[k] * (x[k] - x[k + static_cast<std::size_t>(w)]);
        if (i % w > 0 && valid[k - 1]) acc += smooth_w[k - 1] * (x[k] - x[k - 1]);
        if (i / w > 0 && valid[k - static_cast<std::size_t>(w)])
          acc += smooth_w[k - static_cast<std::size_t>(w)] * (x[k] - x[k - static_cast<std::size_t>(w)]);
        y[k] = acc;
      });
    };
    std::vector<double> diag(current.size(), 1.0);
    parallel_for(n, [&](std::ptrdiff_t i) {
      const auto k = static_cast<std::size_t>(i);
      if (!valid[k]) return;
      double dg = data_w[k];
      if (right_ok(i)) dg += smooth_w[k];
      if (down_ok(i)) dg += smooth_w[k];
      if (i % w > 0 && valid[k - 1]) dg += smooth_w[k - 1];
      if (i / w > 0 && valid[k - static_cast<std::size_t>(w)]) dg += smooth_w[k - static_cast<std::size_t>(w)];
      diag[k] = dg;
    });
    auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
      return deterministic_sum(n, [&](std::ptrdiff_t i) {
        return a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(i)];
      });
    };

    std::vector<double> x = current, r(current.size()), z(current.size()), p(current.size()), q(current.size());
    apply(x, q);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = valid[k] ? data_w[k] * d0[k] - q[k] : 0.0;
    std::vector<double> b(current.size());
    for (std::size_t k = 0; k < b.size(); ++k) b[k] = valid[k] ? data_w[k] * d0[k] : 0.0;
    const double bnorm = std::sqrt(dot(b, b));
    for (std::size_t k = 0; k < z.size(); ++k) z[k] = r[k] / diag[k];
    p = z;
    double rz = dot(r, z);
    bool converged = bnorm == 0.0 || std::sqrt(dot(r, r)) <= params.tolerance * bnorm;
    for (int it = 0; !converged && it < params.inner_iterations; ++it) {
      apply(p, q);
      const double pq = dot(p, q);
      if (!(pq > 0.0)) break;
      const double step_len = rz / pq;
      for (std::size_t k = 0; k < x.size(); ++k) {
        x[k] += step_len * p[k];
        r[k] -= step_len * q[k];
      }
      converged = std::sqrt(dot(r, r)) <= params.tolerance * bnorm;
      if (converged) break;
      for (std::size_t k = 0; k < z.size(); ++k) z[k] = r[k] / diag[k];
      const double rz_next = dot(r, z);
      const double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t k = 0; k < p.size(); ++k) p[k] = z[k] + beta * p[k];
    }

    DisparityMap candidate = initial;
    for (std::size_t k = 0; k < x.size(); ++k)
      if (valid[k]) candidate.values[k] = x[k];
    const double energy = refinement_energy(candidate, initial, alpha, params);
    result.converged = result.converged && converged;
    if (!(energy <= result.energy_after)) break;
    result.map = std::move(candidate);
    result.energy_after = energy;
    current = std::move(x);
  }
  return result;
}

DepthMap variational_refine(const DepthMap& initial, const Image& guide, const RefineParams& params,
                            const Calibration& calib) {
  const DisparityMap d = depth_to_disparity(initial, calib);
  return disparity_to_depth(refine_disparity(d, guide, params).map, calib);
}

}  // namespace lfdepth
