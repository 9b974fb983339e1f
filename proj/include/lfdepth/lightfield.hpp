#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "lfdepth/image.hpp"

namespace lfdepth {

struct Calibration {
  double focal_length_px = 1.0;
  // World units per unit angular step; identical along s and t.
  double baseline = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  // Throws CalibrationError unless focal length and baseline are positive and finite.
  void validate() const;
};

struct ViewIndex {
  int s = 0;
  int t = 0;
  bool operator==(const ViewIndex&) const = default;
};

// S x T grid of rectified RGB views sharing one spatial size.
class LightField {
 public:
  // views are ordered row-major over (t, s): index = t * S + s.
  LightField(int angular_width, int angular_height, std::vector<Image> views, Calibration calib);

  int angular_width() const noexcept { return angular_width_; }    // S
  int angular_height() const noexcept { return angular_height_; }  // T
  int width() const noexcept { return views_.front().width(); }
  int height() const noexcept { return views_.front().height(); }
  const Calibration& calibration() const noexcept { return calib_; }
  ViewIndex center() const noexcept { return {angular_width_ / 2, angular_height_ / 2}; }

  const Image& view(int s, int t) const;
  const Image& view(ViewIndex v) const { return view(v.s, v.t); }
  const std::vector<Image>& views() const noexcept { return views_; }

 private:
  int angular_width_;
  int angular_height_;
  std::vector<Image> views_;
  Calibration calib_;
};

// Row: views along s at fixed t. Column: views along t at fixed s.
enum class Axis { Row, Column };

const char* axis_name(Axis axis) noexcept;

struct SpatioAngularVolume {
  std::vector<Image> images;
  Axis axis = Axis::Row;
  int fixed_index = 0;
  std::vector<int> angular_coords;

  int size() const noexcept { return static_cast<int>(images.size()); }
};

// Throws IndexError when fixed_index is outside the fixed axis or the
// traversed axis has fewer than two views.
SpatioAngularVolume extract_volume(const LightField& lf, Axis axis, int fixed_index);

// Per-pixel scalar map with a validity mask. Invalid samples hold NaN.
template <class Tag>
struct MaskedMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> valid;

  MaskedMap() = default;
  MaskedMap(int w, int h)
      : width(w),
        height(h),
        values(static_cast<std::size_t>(w) * static_cast<std::size_t>(h),
               std::numeric_limits<double>::quiet_NaN()),
        valid(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0) {}

  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
  }
  bool is_valid(int x, int y) const noexcept { return valid[index(x, y)] != 0; }
  double at(int x, int y) const noexcept { return values[index(x, y)]; }
  void set(int x, int y, double v) noexcept {
    values[index(x, y)] = v;
    valid[index(x, y)] = 1;
  }
  void invalidate(int x, int y) noexcept {
    values[index(x, y)] = std::numeric_limits<double>::quiet_NaN();
    valid[index(x, y)] = 0;
  }
  std::size_t valid_count() const noexcept {
    std::size_t n = 0;
    for (auto v : valid) n += v;
    return n;
  }
  bool operator==(const MaskedMap& o) const noexcept {
    if (width != o.width || height != o.height || valid != o.valid) return false;
    for (std::size_t i = 0; i < values.size(); ++i)
      if (valid[i] && values[i] != o.values[i]) return false;
    return true;
  }
};

struct DisparityTag {};
struct DepthTag {};
using DisparityMap = MaskedMap<DisparityTag>;  // pixels per unit angular step
using DepthMap = MaskedMap<DepthTag>;          // world units

// Disparities with |d| below this are treated as points at infinity.
inline constexpr double kDisparityEpsilon = 1e-6;

// Z = -f * baseline / d.
DepthMap disparity_to_depth(const DisparityMap& d, const Calibration& calib);
DisparityMap depth_to_disparity(const DepthMap& z, const Calibration& calib);

// Map <-> single-channel image. Invalid samples become NaN; non-finite
// samples read back as invalid.
template <class Tag>
Image to_image(const MaskedMap<Tag>& map) {
  Image img(map.width, map.height, 1);
  for (std::size_t i = 0; i < map.values.size(); ++i)
    img.data()[i] = map.valid[i] ? map.values[i] : std::numeric_limits<double>::quiet_NaN();
  return img;
}
template <class Map>
Map map_from_image(const Image& img) {
  Map map(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (std::isfinite(img.at(x, y, 0))) map.set(x, y, img.at(x, y, 0));
  return map;
}

// Directory layout of an HCI-style light field. view_pattern is a printf
// pattern taking the linear view index t * S + s.
struct HciLayout {
  std::string view_pattern = "input_Cam%03d.png";
  std::string params_file = "parameters.cfg";
  std::string key_focal_length = "focal_length_mm";
  std::string key_sensor_size = "sensor_size_mm";
  std::string key_image_width = "image_resolution_x_px";
  std::string key_baseline = "baseline_mm";
  std::string key_cams_x = "num_cams_x";
  std::string key_cams_y = "num_cams_y";
};

LightField load_hci(const std::filesystem::path& dir, const HciLayout& layout = {});

// Writes views as 8-bit PNGs plus a parameter file that load_hci reads back.
// Used for synthetic datasets.
void write_hci(const std::filesystem::path& dir, const LightField& lf, double sensor_size = 35.0,
               const HciLayout& layout = {});

}  // namespace lfdepth
