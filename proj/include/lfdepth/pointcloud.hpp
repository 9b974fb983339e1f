#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "lfdepth/image.hpp"
#include "lfdepth/lightfield.hpp"

namespace lfdepth {

// World frame: right-handed, origin at the reference camera, +X along
// increasing s, +Y along increasing t (image down), +Z into the scene.
struct CloudPoint {
  double x = 0.0, y = 0.0, z = 0.0;
  double r = 0.0, g = 0.0, b = 0.0;
  ViewIndex source;
};

struct PointCloud {
  std::vector<CloudPoint> points;
  std::size_t size() const noexcept { return points.size(); }
};

// Pinhole back-projection of every valid depth pixel of the view at `index`;
// cameras sit on the angular plane at baseline * (index - reference).
PointCloud backproject(const DepthMap& depth, const Image& view, ViewIndex index, ViewIndex reference,
                       const Calibration& calib);

// Image coordinates of a world point in the view at `index`.
std::array<double, 2> project(const CloudPoint& p, ViewIndex index, ViewIndex reference, const Calibration& calib);

// Concatenation in input order. With voxel_size > 0 only the first point
// landing in each voxel is kept.
PointCloud fuse_clouds(std::span<const PointCloud> clouds, double voxel_size = 0.0);

// Disparity of the reference view resampled into the view `steps_s`,
// `steps_t` angular steps away by following the disparities themselves.
DisparityMap warp_disparity_to_view(const DisparityMap& reference_disparity, int steps_s, int steps_t);

// Single-view mode back-projects the reference depth only; dense mode
// back-projects a depth map for every view of the light field and fuses them.
PointCloud light_field_point_cloud(const LightField& lf, const DisparityMap& reference_disparity, bool dense,
                                   double voxel_size = 0.0);

enum class PlyFormat { Ascii, BinaryLittleEndian };

// x y z as float32, red green blue as uint8. Throws IoError on failure.
void write_ply(const PointCloud& cloud, const std::filesystem::path& path, PlyFormat format);
void write_ply(const PointCloud& cloud, std::ostream& out, PlyFormat format);

}  // namespace lfdepth
