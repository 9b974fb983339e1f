#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lfdepth/lightfield.hpp"
#include "lfdepth/pipeline.hpp"

namespace lfdepth {

// 100 * mean squared error over pixels valid in both maps and set in mask
// (an empty mask selects every pixel). Throws NoDataError when nothing is
// left to evaluate.
double mse100(const DisparityMap& est, const DisparityMap& gt, const std::vector<std::uint8_t>& mask = {});

// Mask that drops a band of `border` pixels along every image edge.
std::vector<std::uint8_t> border_mask(int width, int height, int border);

enum class TextureKind { Noise, Checkerboard };

// Fronto-parallel textured plane (or disparity ramp) seen from the center
// view. `disparity` is the magnitude f * baseline / Z in pixels per angular
// step; larger is nearer. The rectangle [x0, x1) x [y0, y1) is in center-view
// pixels; an empty rectangle covers the whole plane.
struct PlaneSpec {
  double disparity = 1.0;
  double ramp = 0.0;  // d(disparity)/dx across the center view, per pixel
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  std::uint64_t texture_seed = 1;
  bool bounded() const noexcept { return x1 > x0 && y1 > y0; }
};

struct SceneSpec {
  int views_s = 5;
  int views_t = 5;
  int width = 128;
  int height = 128;
  std::vector<PlaneSpec> planes;
  TextureKind texture = TextureKind::Noise;
  double focal_length_px = 100.0;
  double baseline = 0.05;
  // Round views to 8-bit levels, as if written to PNG.
  bool quantize = true;
};

struct SyntheticScene {
  LightField light_field;
  DisparityMap ground_truth;  // center view, signed pipeline convention
};

// Throws SpecError for overlapping planes at equal disparity or no planes.
SyntheticScene make_synthetic_lightfield(const SceneSpec& spec);

SceneSpec constant_scene(double disparity = 1.6, int size = 128, int views = 5);
SceneSpec two_plane_scene(double far = 1.0, double near = 3.0, int size = 128, int views = 5);
SceneSpec ramp_scene(double d0 = 1.0, double d1 = 2.0, int size = 128, int views = 5);
// "constant", "two-plane" or "ramp"; throws SpecError otherwise.
SceneSpec scene_preset(const std::string& name, int size = 128, int views = 5);

struct EvalReport {
  std::optional<double> mse100;
  double valid_fraction = 0.0;
  std::vector<StageTiming> runtime_seconds;
  double total_seconds = 0.0;
  std::uint64_t rng_seed = 0;
  std::string source;
  std::string config_snapshot;  // "key = value" lines
};

// Runs estimate_depth, times it and scores it against gt when given.
EvalReport run_benchmark(const LightField& lf, const DisparityMap* gt, const PipelineConfig& config, int border = 16,
                         DepthEstimate* estimate_out = nullptr);

// Flat "key = value" report plus a JSON sidecar with the same content.
void write_report(const EvalReport& report, const std::filesystem::path& text_path,
                  const std::filesystem::path& json_path);
std::string report_text(const EvalReport& report);

}  // namespace lfdepth
