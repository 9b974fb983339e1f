#include "lfdepth/pointcloud.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <unordered_set>

#include "lfdepth/errors.hpp"
#include "lfdepth/parallel.hpp"

namespace lfdepth {

PointCloud backproject(const DepthMap& depth, const Image& view, ViewIndex index, ViewIndex reference,
                       const Calibration& calib) {
  calib.validate();
  if (depth.width != view.width() || depth.height != view.height())
    throw SizeError("depth map and view differ in size");
  const double ox = (index.s - reference.s) * calib.baseline;
  const double oy = (index.t - reference.t) * calib.baseline;
  const double inv_f = 1.0 / calib.focal_length_px;
  PointCloud cloud;
  cloud.points.reserve(depth.valid_count());
  for (int y = 0; y < depth.height; ++y)
    for (int x = 0; x < depth.width; ++x) {
      if (!depth.is_valid(x, y)) continue;
      const double z = depth.at(x, y);
      CloudPoint p;
      p.x = (x - calib.cx) * z * inv_f + ox;
      p.y = (y - calib.cy) * z * inv_f + oy;
      p.z = z;
      if (view.channels() >= 3) {
        p.r = view.at(x, y, 0);
        p.g = view.at(x, y, 1);
        p.b = view.at(x, y, 2);
      } else {
        p.r = p.g = p.b = view.at(x, y, 0);
      }
      p.source = index;
      cloud.points.push_back(p);
    }
  return cloud;
}

std::array<double, 2> project(const CloudPoint& p, ViewIndex index, ViewIndex reference, const Calibration& calib) {
  const double ox = (index.s - reference.s) * calib.baseline;
  const double oy = (index.t - reference.t) * calib.baseline;
  return {calib.cx + calib.focal_length_px * (p.x - ox) / p.z, calib.cy + calib.focal_length_px * (p.y - oy) / p.z};
}

namespace {

struct VoxelKey {
  std::int64_t x, y, z;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelHash {
  std::size_t operator()(const VoxelKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ull;
    h ^= static_cast<std::uint64_t>(k.y) + 0x7F4A7C159E3779B9ull + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.z) + 0x94D049BB133111EBull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

PointCloud fuse_clouds(std::span<const PointCloud> clouds, double voxel_size) {
  PointCloud out;
  std::size_t total = 0;
  for (const auto& c : clouds) total += c.size();
  if (!(voxel_size > 0.0)) {
    out.points.reserve(total);
    for (const auto& c : clouds) out.points.insert(out.points.end(), c.points.begin(), c.points.end());
    return out;
  }
  std::unordered_set<VoxelKey, VoxelHash> occupied;
  occupied.reserve(total);
  for (const auto& c : clouds)
    for (const auto& p : c.points) {
      const VoxelKey key{static_cast<std::int64_t>(std::floor(p.x / voxel_size)),
                         static_cast<std::int64_t>(std::floor(p.y / voxel_size)),
                         static_cast<std::int64_t>(std::floor(p.z / voxel_size))};
      if (occupied.insert(key).second) out.points.push_back(p);
    }
  return out;
}

DisparityMap warp_disparity_to_view(const DisparityMap& ref, int steps_s, int steps_t) {
  if (steps_s == 0 && steps_t == 0) return ref;
  DisparityMap out(ref.width, ref.height);
  // A reference pixel p appears at p + d(p) * steps; invert by fixed point.
  auto sample = [&](double x, double y, double& d) {
    const int xi = static_cast<int>(std::lround(x));
    const int yi = static_cast<int>(std::lround(y));
    if (xi < 0 || yi < 0 || xi >= ref.width || yi >= ref.height || !ref.is_valid(xi, yi)) return false;
    d = ref.at(xi, yi);
    return true;
  };
  parallel_for(ref.height, [&](std::ptrdiff_t yy) {
    const int y = static_cast<int>(yy);
    for (int x = 0; x < ref.width; ++x) {
      double d = 0.0;
      if (!sample(x, y, d)) continue;
      bool ok = true;
      for (int it = 0; ok && it < 5; ++it) ok = sample(x - d * steps_s, y - d * steps_t, d);
      if (ok) out.set(x, y, d);
    }
  });
  return out;
}

PointCloud light_field_point_cloud(const LightField& lf, const DisparityMap& reference_disparity, bool dense,
                                   double voxel_size) {
  const ViewIndex ref = lf.center();
  std::vector<ViewIndex> views;
  if (dense) {
    for (int t = 0; t < lf.angular_height(); ++t)
      for (int s = 0; s < lf.angular_width(); ++s) views.push_back({s, t});
  } else {
    views.push_back(ref);
  }
  std::vector<PointCloud> clouds(views.size());
  parallel_for(static_cast<std::ptrdiff_t>(views.size()), [&](std::ptrdiff_t i) {
    const ViewIndex v = views[static_cast<std::size_t>(i)];
    const DisparityMap d = warp_disparity_to_view(reference_disparity, v.s - ref.s, v.t - ref.t);
    clouds[static_cast<std::size_t>(i)] =
        backproject(disparity_to_depth(d, lf.calibration()), lf.view(v), v, ref, lf.calibration());
  });
  return fuse_clouds(clouds, voxel_size);
}

namespace {

std::uint8_t to_u8(double c) { return static_cast<std::uint8_t>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0)); }

void put_le32(std::ostream& out, float v) {
  std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
  const char bytes[4] = {static_cast<char>(bits & 0xFF), static_cast<char>((bits >> 8) & 0xFF),
                         static_cast<char>((bits >> 16) & 0xFF), static_cast<char>((bits >> 24) & 0xFF)};
  out.write(bytes, 4);
}

}  // namespace

void write_ply(const PointCloud& cloud, std::ostream& out, PlyFormat format) {
  out << "ply\n"
      << "format " << (format == PlyFormat::Ascii ? "ascii" : "binary_little_endian") << " 1.0\n"
      << "element vertex " << cloud.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
      << "end_header\n";
  if (format == PlyFormat::Ascii) {
    out.precision(9);
    for (const auto& p : cloud.points)
      out << static_cast<float>(p.x) << ' ' << static_cast<float>(p.y) << ' ' << static_cast<float>(p.z) << ' '
          << int{to_u8(p.r)} << ' ' << int{to_u8(p.g)} << ' ' << int{to_u8(p.b)} << '\n';
    return;
  }
  for (const auto& p : cloud.points) {
    put_le32(out, static_cast<float>(p.x));
    put_le32(out, static_cast<float>(p.y));
    put_le32(out, static_cast<float>(p.z));
    const char rgb[3] = {static_cast<char>(to_u8(p.r)), static_cast<char>(to_u8(p.g)), static_cast<char>(to_u8(p.b))};
    out.write(rgb, 3);
  }
}

void write_ply(const PointCloud& cloud, const std::filesystem::path& path, PlyFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_ply(cloud, out, format);
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace lfdepth
