#include "lfdepth/lightfield.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "lfdepth/errors.hpp"
#include "lfdepth/parallel.hpp"
#include "lfdepth/raster_io.hpp"

namespace lfdepth {

namespace fs = std::filesystem;

void Calibration::validate() const {
  if (!(focal_length_px > 0.0) || !std::isfinite(focal_length_px))
    throw CalibrationError("focal length must be positive");
  if (!(baseline > 0.0) || !std::isfinite(baseline)) throw CalibrationError("baseline must be positive");
  if (!std::isfinite(cx) || !std::isfinite(cy)) throw CalibrationError("principal point must be finite");
}

LightField::LightField(int angular_width, int angular_height, std::vector<Image> views, Calibration calib)
    : angular_width_(angular_width), angular_height_(angular_height), views_(std::move(views)), calib_(calib) {
  if (angular_width < 1 || angular_height < 1 || (angular_width < 2 && angular_height < 2))
    throw StructureError("light field needs at least two views along one angular axis");
  if (views_.size() != static_cast<std::size_t>(angular_width) * static_cast<std::size_t>(angular_height))
    throw StructureError("view count does not match the angular size");
  const Image& first = views_.front();
  if (first.channels() != 3) throw StructureError("views must have 3 channels");
  for (const Image& v : views_)
    if (!v.same_shape(first)) throw StructureError("views differ in size or channel count");
  calib_.validate();
}

const Image& LightField::view(int s, int t) const {
  if (s < 0 || s >= angular_width_ || t < 0 || t >= angular_height_)
    throw IndexError("view index out of range");
  return views_[static_cast<std::size_t>(t) * static_cast<std::size_t>(angular_width_) + static_cast<std::size_t>(s)];
}

const char* axis_name(Axis axis) noexcept { return axis == Axis::Row ? "row" : "col"; }

SpatioAngularVolume extract_volume(const LightField& lf, Axis axis, int fixed_index) {
  const int fixed_extent = axis == Axis::Row ? lf.angular_height() : lf.angular_width();
  const int extent = axis == Axis::Row ? lf.angular_width() : lf.angular_height();
  if (fixed_index < 0 || fixed_index >= fixed_extent) throw IndexError("fixed angular index out of range");
  if (extent < 2) throw IndexError("traversed angular axis has fewer than two views");
  SpatioAngularVolume vol;
  vol.axis = axis;
  vol.fixed_index = fixed_index;
  vol.images.reserve(static_cast<std::size_t>(extent));
  for (int n = 0; n < extent; ++n) {
    vol.images.push_back(axis == Axis::Row ? lf.view(n, fixed_index) : lf.view(fixed_index, n));
    vol.angular_coords.push_back(n);
  }
  return vol;
}

DepthMap disparity_to_depth(const DisparityMap& d, const Calibration& calib) {
  calib.validate();
  DepthMap z(d.width, d.height);
  const double scale = -calib.focal_length_px * calib.baseline;
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    if (!d.valid[i]) continue;
    const double disp = d.values[i];
    if (!std::isfinite(disp) || std::abs(disp) < kDisparityEpsilon) continue;
    const double depth = scale / disp;
    if (!std::isfinite(depth)) continue;
    z.values[i] = depth;
    z.valid[i] = 1;
  }
  return z;
}

DisparityMap depth_to_disparity(const DepthMap& z, const Calibration& calib) {
  calib.validate();
  DisparityMap d(z.width, z.height);
  const double scale = -calib.focal_length_px * calib.baseline;
  for (std::size_t i = 0; i < z.values.size(); ++i) {
    if (!z.valid[i] || !std::isfinite(z.values[i]) || z.values[i] == 0.0) continue;
    d.values[i] = scale / z.values[i];
    d.valid[i] = 1;
  }
  return d;
}

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::map<std::string, std::string> read_key_values(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw StructureError("cannot open parameter file " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

double number_for(const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw CalibrationError("parameter file lacks key '" + key + "'");
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size() || !std::isfinite(v)) throw std::invalid_argument(key);
    return v;
  } catch (const std::logic_error&) {
    throw CalibrationError("parameter '" + key + "' is not a number: " + it->second);
  }
}

fs::path view_path(const fs::path& dir, const std::string& pattern, int index) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern.c_str(), index);
  return dir / buf;
}

}  // namespace

LightField load_hci(const fs::path& dir, const HciLayout& layout) {
  if (!fs::is_directory(dir)) throw StructureError("light field directory not found: " + dir.string());
  const auto kv = read_key_values(dir / layout.params_file);
  const double focal = number_for(kv, layout.key_focal_length);
  const double sensor = number_for(kv, layout.key_sensor_size);
  const double width_px = number_for(kv, layout.key_image_width);
  const double baseline = number_for(kv, layout.key_baseline);
  const double cams_x = number_for(kv, layout.key_cams_x);
  const double cams_y = number_for(kv, layout.key_cams_y);
  if (cams_x < 1 || cams_y < 1 || cams_x != std::floor(cams_x) || cams_y != std::floor(cams_y))
    throw CalibrationError("camera counts must be positive integers");
  if (!(sensor > 0.0) || !(width_px > 0.0)) throw CalibrationError("sensor size and image width must be positive");
  const int S = static_cast<int>(cams_x);
  const int T = static_cast<int>(cams_y);
  const int count = S * T;
  for (int i = 0; i < count; ++i)
    if (!fs::is_regular_file(view_path(dir, layout.view_pattern, i)))
      throw StructureError("missing view " + view_path(dir, layout.view_pattern, i).string() + " (declared " +
                           std::to_string(S) + "x" + std::to_string(T) + ")");
  if (fs::exists(view_path(dir, layout.view_pattern, count)))
    throw StructureError("directory holds more views than the declared " + std::to_string(S) + "x" +
                         std::to_string(T));

  std::vector<Image> views(static_cast<std::size_t>(count));
  parallel_for(count, [&](std::ptrdiff_t i) {
    views[static_cast<std::size_t>(i)] = read_png_rgb(view_path(dir, layout.view_pattern, static_cast<int>(i)));
  });
  for (const Image& v : views)
    if (!v.same_shape(views.front())) throw StructureError("views differ in size");
  const int W = views.front().width();
  const int H = views.front().height();
  if (static_cast<int>(width_px) != W)
    throw StructureError("parameter file declares width " + std::to_string(static_cast<int>(width_px)) +
                         " but views are " + std::to_string(W) + " px wide");

  Calibration calib;
  calib.focal_length_px = focal * W / sensor;
  calib.baseline = baseline;
  calib.cx = (W - 1) / 2.0;
  calib.cy = (H - 1) / 2.0;
  return LightField(S, T, std::move(views), calib);
}

void write_hci(const fs::path& dir, const LightField& lf, double sensor_size, const HciLayout& layout) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const int S = lf.angular_width();
  for (int t = 0; t < lf.angular_height(); ++t)
    for (int s = 0; s < S; ++s) write_png_rgb8(view_path(dir, layout.view_pattern, t * S + s), lf.view(s, t));
  std::ofstream out(dir / layout.params_file);
  if (!out) throw IoError("cannot write parameter file in " + dir.string());
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "[intrinsics]\n"
      << layout.key_focal_length << " = " << num(lf.calibration().focal_length_px * sensor_size / lf.width()) << "\n"
      << layout.key_image_width << " = " << lf.width() << "\n"
      << "image_resolution_y_px = " << lf.height() << "\n"
      << layout.key_sensor_size << " = " << num(sensor_size) << "\n"
      << "[extrinsics]\n"
      << layout.key_cams_x << " = " << S << "\n"
      << layout.key_cams_y << " = " << lf.angular_height() << "\n"
      << layout.key_baseline << " = " << num(lf.calibration().baseline) << "\n";
  if (!out) throw IoError("failed writing parameter file");
}

}  // namespace lfdepth
