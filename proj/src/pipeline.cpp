#include "lfdepth/pipeline.hpp"

#include <chrono>

#include "lfdepth/errors.hpp"
#include "lfdepth/rng.hpp"

namespace lfdepth {

namespace {

class StageClock {
 public:
  explicit StageClock(std::vector<StageTiming>& sink) : sink_(sink) {}

  template <class Fn>
  auto run(const std::string& stage, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    struct Record {
      StageClock& clock;
      const std::string& stage;
      std::chrono::steady_clock::time_point start;
      ~Record() {
        clock.add(stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
      }
    } record{*this, stage, start};
    return fn();
  }

  void add(const std::string& stage, double seconds) {
    for (auto& t : sink_)
      if (t.stage == stage) {
        t.seconds += seconds;
        return;
      }
    sink_.push_back({stage, seconds});
  }

 private:
  std::vector<StageTiming>& sink_;
};

}  // namespace

std::vector<std::pair<Axis, int>> selected_volumes(const LightField& lf, const PipelineConfig& config) {
  std::vector<std::pair<Axis, int>> out;
  const ViewIndex c = lf.center();
  for (int row : config.rows) {
    if (row == kCenterIndex) {
      if (lf.angular_width() >= 2) out.emplace_back(Axis::Row, c.t);
    } else {
      out.emplace_back(Axis::Row, row);
    }
  }
  for (int col : config.cols) {
    if (col == kCenterIndex) {
      if (lf.angular_height() >= 2) out.emplace_back(Axis::Column, c.s);
    } else {
      out.emplace_back(Axis::Column, col);
    }
  }
  return out;
}

VolumeFlows estimate_volume_flows(const LightField& lf, Axis axis, int fixed_index, const PipelineConfig& config) {
  SpatioAngularVolume vol = extract_volume(lf, axis, fixed_index);
  if (axis == Axis::Column)
    for (Image& img : vol.images) img = transpose(img);

  VolumeFlows out;
  out.axis = axis;
  out.fixed_index = fixed_index;
  CpmFrame prev = make_cpm_frame(vol.images.front(), config.cpm);
  for (int n = 0; n + 1 < vol.size(); ++n) {
    CpmFrame next = make_cpm_frame(vol.images[static_cast<std::size_t>(n + 1)], config.cpm);
    const std::uint64_t stream =
        mix_seed(axis == Axis::Row ? 1u : 2u, static_cast<std::uint64_t>(fixed_index), static_cast<std::uint64_t>(n));
    CpmPairResult pair = cpm_match_pair(prev, next, config.cpm, stream);
    if (pair.filtered.matches.empty())
      throw NoDataError(std::string("no consistent matches for ") + axis_name(axis) + " " +
                        std::to_string(fixed_index) + " pair " + std::to_string(n));
    out.sparse.push_back(std::move(pair.filtered));
    prev = std::move(next);
  }
  out.flows = feature_flow(vol, out.sparse, config.dt);
  return out;
}

DepthEstimate estimate_depth(const LightField& lf, const PipelineConfig& config) {
  const auto volumes = selected_volumes(lf, config);
  if (volumes.empty()) throw StructureError("no row or column with two or more views selected");
  config.dt.validate();
  config.refine.validate();

  DepthEstimate est;
  StageClock clock(est.timings);
  const auto total_start = std::chrono::steady_clock::now();
  const ViewIndex center = lf.center();

  for (const auto& [axis, fixed] : volumes) {
    VolumeFlows flows = clock.run("flow", [&] { return estimate_volume_flows(lf, axis, fixed, config); });
    clock.run("registration", [&] {
      const int center_index = axis == Axis::Row ? center.s : center.t;
      EstimateStack stack = register_to_center(flows.flows, center_index, axis, fixed);
      for (std::size_t k = 0; k < stack.maps.size(); ++k) {
        auto& map = stack.maps[k];
        auto& wgt = stack.weights[k];
        if (axis == Axis::Column) {
          wgt = transpose(wgt);
          map = shift_to_reference(transpose(map), fixed - center.s, false, &wgt);
        } else {
          map = shift_to_reference(map, fixed - center.t, true, &wgt);
        }
      }
      est.stack.append(std::move(stack));
      return 0;
    });
    est.volumes.push_back(std::move(flows));
  }

  est.fused = clock.run("fusion", [&] { return median_fuse(est.stack); });
  RefineResult refined = clock.run("refinement", [&] { return refine_disparity(est.fused, lf.view(center), config.refine); });
  est.disparity = std::move(refined.map);
  est.refine_converged = refined.converged;
  est.depth = disparity_to_depth(est.disparity, lf.calibration());
  clock.add("total", std::chrono::duration<double>(std::chrono::steady_clock::now() - total_start).count());
  return est;
}

}  // namespace lfdepth
