#pragma once

#include <span>
#include <vector>

#include "lfdepth/cpm.hpp"
#include "lfdepth/domain_transform.hpp"
#include "lfdepth/image.hpp"
#include "lfdepth/lightfield.hpp"

namespace lfdepth {

// flows[n] holds the horizontal displacement from view n to view n+1 for
// every pixel of view n; confidences[n] its weight in [0,1]; guide the N views.
struct FlowVolume {
  std::vector<Image> flows;
  std::vector<Image> confidences;
  std::vector<Image> guide;

  int size() const noexcept { return static_cast<int>(flows.size()); }
};

struct DenseFlow {
  Image flow;
  Image confidence;
};

// Seeds weighted by their confidence, spread by the edge-aware filter guided
// by the view. Throws NoDataError when no seed carries positive confidence.
DenseFlow densify_spatial(const SparseMatchSet& sparse, const Image& guide, const DtParams& params);

// One recursive pass along the angular dimension: flow n at x couples with
// flow n+1 at x + f_n(x) and flow n-1 at x - f_n(x), with feedback set by the
// guide-color change along that path (scaled by ratio), the change of the path
// flow itself (scaled by flow_ratio; 0 ignores it) and kernel width sigma.
void angular_pass(std::vector<Image>& num, std::vector<Image>& den, const std::vector<Image>& paths,
                  const std::vector<Image>& guide, double sigma, double ratio, double flow_ratio = 0.0);

// Angular filtering of a densified volume with kernel params.sigma_a.
FlowVolume propagate_angular(const FlowVolume& vol, const DtParams& params);

// Full volumetric filter: densify each pair, then `iterations` rounds of
// horizontal, vertical and angular passes over the confidence-weighted seeds,
// with paths following the current flow estimate.
FlowVolume feature_flow(const SpatioAngularVolume& volume, std::span<const SparseMatchSet> sparse,
                        const DtParams& params);

}  // namespace lfdepth
