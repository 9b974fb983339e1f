#pragma once

#include <span>
#include <vector>

#include "lfdepth/featureflow.hpp"
#include "lfdepth/image.hpp"
#include "lfdepth/lightfield.hpp"

namespace lfdepth {

struct EstimateProvenance {
  Axis axis = Axis::Row;
  int fixed_index = 0;
  int pair_index = 0;
};

// Disparity estimates registered to one reference view.
struct EstimateStack {
  std::vector<DisparityMap> maps;
  std::vector<Image> weights;
  std::vector<EstimateProvenance> provenance;

  std::size_t size() const noexcept { return maps.size(); }
  void append(EstimateStack&& other);
};

// Warps every pairwise flow of the volume into the frame of view
// center_index by following the flows from that view, so each map gives
// disparity per unit angular step at the center view's pixels. Pixels whose
// path leaves the image are invalid.
EstimateStack register_to_center(const FlowVolume& flows, int center_index, Axis axis = Axis::Row,
                                 int fixed_index = 0);

template <class Tag>
MaskedMap<Tag> transpose(const MaskedMap<Tag>& map) {
  MaskedMap<Tag> out(map.height, map.width);
  for (int y = 0; y < map.height; ++y)
    for (int x = 0; x < map.width; ++x)
      if (map.is_valid(x, y)) out.set(y, x, map.at(x, y));
  return out;
}

// Re-registers a map from a view `steps` angular steps away (vertically when
// `vertical`) to the reference view, using the map's own disparities.
// Optional per-pixel weights are resampled along the same mapping.
DisparityMap shift_to_reference(const DisparityMap& map, double steps, bool vertical, Image* weights = nullptr);

// Weighted median; the lowest value whose cumulative weight reaches half the
// total. Non-positive total weight falls back to equal weights.
double weighted_median(std::span<const double> values, std::span<const double> weights);

// Per-pixel weighted median across the stack followed by a 3x3 median over
// valid neighbours, clamped to the pixel's own estimate range. Throws
// NoDataError for an empty stack.
DisparityMap median_fuse(const EstimateStack& stack);

struct RefineParams {
  double lambda = 1.0;
  double kappa = 5.0;
  double epsilon = 1e-3;
  int fixed_point_iterations = 1;
  int inner_iterations = 100;
  double tolerance = 1e-6;
  // Edge-aware smoothing of the initial map before measuring its gradient.
  double guide_sigma_s = 5.0;
  double guide_sigma_r = 0.08;

  void validate() const;
};

struct RefineResult {
  DisparityMap map;
  double energy_before = 0.0;
  double energy_after = 0.0;
  bool converged = true;
};

// Local smoothness weight exp(-kappa * |grad|) of the guided-smoothed map.
std::vector<double> smoothness_weights(const DisparityMap& initial, const Image& guide, const RefineParams& params);

// sum psi((d - d0)^2) + lambda * sum alpha * psi(|grad d|^2), psi(s2) = sqrt(s2 + eps^2),
// over valid pixels with forward differences between valid neighbours.
double refinement_energy(const DisparityMap& d, const DisparityMap& initial, std::span<const double> alpha,
                         const RefineParams& params);

// Lagged-nonlinearity fixed-point steps around the initial map; each step
// solves the linearised system by preconditioned conjugate gradients. The
// result never has higher energy than the input.
RefineResult refine_disparity(const DisparityMap& initial, const Image& guide, const RefineParams& params);

// Depth-space entry point: refines the corresponding disparity map and
// converts back.
DepthMap variational_refine(const DepthMap& initial, const Image& guide, const RefineParams& params,
                            const Calibration& calib);

}  // namespace lfdepth
