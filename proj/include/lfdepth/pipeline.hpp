#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lfdepth/cpm.hpp"
#include "lfdepth/domain_transform.hpp"
#include "lfdepth/featureflow.hpp"
#include "lfdepth/fusion.hpp"
#include "lfdepth/lightfield.hpp"

namespace lfdepth {

// Row/column selector meaning "the center index of that axis".
inline constexpr int kCenterIndex = -1;

struct PipelineConfig {
  CpmParams cpm;
  DtParams dt;
  RefineParams refine;
  std::vector<int> rows{kCenterIndex};
  std::vector<int> cols{kCenterIndex};
};

struct VolumeFlows {
  Axis axis = Axis::Row;
  int fixed_index = 0;
  // Matches and flows live in the volume frame; column volumes are transposed
  // so that their disparity runs along x.
  std::vector<SparseMatchSet> sparse;
  FlowVolume flows;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct DepthEstimate {
  DisparityMap fused;      // median fusion of all registered estimates
  DisparityMap disparity;  // after variational refinement
  DepthMap depth;
  EstimateStack stack;
  std::vector<VolumeFlows> volumes;
  std::vector<StageTiming> timings;
  bool refine_converged = true;
};

// Resolved (axis, fixed_index) list; kCenterIndex entries become the center.
std::vector<std::pair<Axis, int>> selected_volumes(const LightField& lf, const PipelineConfig& config);

// Flow estimation for one volume: CPM on every consecutive pair, then feature flow.
VolumeFlows estimate_volume_flows(const LightField& lf, Axis axis, int fixed_index, const PipelineConfig& config);

// Extract volumes, match and filter them, register to the center view, fuse,
// refine and convert to depth. Throws StructureError when no selected volume
// has two or more views.
DepthEstimate estimate_depth(const LightField& lf, const PipelineConfig& config);

}  // namespace lfdepth
