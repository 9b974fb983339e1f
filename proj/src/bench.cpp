#include "lfdepth/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "lfdepth/config.hpp"
#include "lfdepth/errors.hpp"
#include "lfdepth/rng.hpp"

namespace lfdepth {

double mse100(const DisparityMap& est, const DisparityMap& gt, const std::vector<std::uint8_t>& mask) {
  if (est.width != gt.width || est.height != gt.height) throw SizeError("estimate and ground truth differ in size");
  if (!mask.empty() && mask.size() != est.values.size()) throw SizeError("mask size mismatch");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < est.values.size(); ++i) {
    if (!est.valid[i] || !gt.valid[i] || (!mask.empty() && !mask[i])) continue;
    const double e = est.values[i] - gt.values[i];
    sum += e * e;
    ++count;
  }
  if (count == 0) throw NoDataError("no pixels to evaluate");
  return 100.0 * sum / static_cast<double>(count);
}

std::vector<std::uint8_t> border_mask(int width, int height, int border) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
  for (int y = border; y < height - border; ++y)
    for (int x = border; x < width - border; ++x) mask[static_cast<std::size_t>(y) * width + x] = 1;
  return mask;
}

namespace {

double lattice_value(std::uint64_t seed, std::int64_t ix, std::int64_t iy, int channel) {
  const std::uint64_t h = mix_seed(seed, static_cast<std::uint64_t>(ix), static_cast<std::uint64_t>(iy),
                                   static_cast<std::uint64_t>(channel));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Bilinear value noise with lattice spacing `cell`.
double value_noise(std::uint64_t seed, double x, double y, double cell, int channel) {
  const double gx = x / cell;
  const double gy = y / cell;
  const double fx0 = std::floor(gx);
  const double fy0 = std::floor(gy);
  const auto ix = static_cast<std::int64_t>(fx0);
  const auto iy = static_cast<std::int64_t>(fy0);
  const double fx = gx - fx0;
  const double fy = gy - fy0;
  const double top = (1 - fx) * lattice_value(seed, ix, iy, channel) + fx * lattice_value(seed, ix + 1, iy, channel);
  const double bottom =
      (1 - fx) * lattice_value(seed, ix, iy + 1, channel) + fx * lattice_value(seed, ix + 1, iy + 1, channel);
  return (1 - fy) * top + fy * bottom;
}

double checker_value(double x, double y, int channel, std::uint64_t seed) {
  auto cell = [&](double cx, double cy) {
    const auto ix = static_cast<std::int64_t>(std::floor(cx / 8.0));
    const auto iy = static_cast<std::int64_t>(std::floor(cy / 8.0));
    return ((ix + iy) & 1) ? 0.85 : 0.15 + 0.1 * channel * (seed % 3) / 2.0;
  };
  const double x0 = std::floor(x), y0 = std::floor(y);
  const double fx = x - x0, fy = y - y0;
  const double top = (1 - fx) * cell(x0, y0) + fx * cell(x0 + 1, y0);
  const double bottom = (1 - fx) * cell(x0, y0 + 1) + fx * cell(x0 + 1, y0 + 1);
  return (1 - fy) * top + fy * bottom;
}

double texture(TextureKind kind, std::uint64_t seed, double x, double y, int channel) {
  if (kind == TextureKind::Checkerboard) return checker_value(x, y, channel, seed);
  const double tint = 0.2 * lattice_value(seed, -7, -7, channel);
  const double v = 0.45 * value_noise(seed, x, y, 4.0, channel) + 0.3 * value_noise(seed ^ 0xA5A5u, x, y, 2.0, channel) +
                   0.25 * value_noise(seed ^ 0x5A5Au, x, y, 8.0, channel);
  return std::clamp(0.8 * v + tint, 0.0, 1.0);
}

double plane_magnitude(const PlaneSpec& p, double xc, double cx) { return p.disparity + p.ramp * (xc - cx); }

bool rects_overlap(const PlaneSpec& a, const PlaneSpec& b) {
  if (!a.bounded() || !b.bounded()) return true;
  return a.x0 < b.x1 && b.x0 < a.x1 && a.y0 < b.y1 && b.y0 < a.y1;
}

}  // namespace

SyntheticScene make_synthetic_lightfield(const SceneSpec& spec) {
  if (spec.planes.empty()) throw SpecError("scene has no planes");
  if (spec.views_s < 1 || spec.views_t < 1 || spec.width < 1 || spec.height < 1)
    throw SpecError("scene dimensions must be positive");
  for (std::size_t i = 0; i < spec.planes.size(); ++i)
    for (std::size_t j = i + 1; j < spec.planes.size(); ++j)
      if (spec.planes[i].disparity == spec.planes[j].disparity && rects_overlap(spec.planes[i], spec.planes[j]))
        throw SpecError("overlapping planes share the same disparity");

  std::vector<PlaneSpec> planes = spec.planes;
  std::stable_sort(planes.begin(), planes.end(),
                   [](const PlaneSpec& a, const PlaneSpec& b) { return a.disparity > b.disparity; });

  Calibration calib;
  calib.focal_length_px = spec.focal_length_px;
  calib.baseline = spec.baseline;
  calib.cx = (spec.width - 1) / 2.0;
  calib.cy = (spec.height - 1) / 2.0;
  const int sc = spec.views_s / 2;
  const int tc = spec.views_t / 2;

  // Center-view coordinates of the plane point seen at (x, y) from a view
  // (ds, dt) steps away: x = xc - m(xc) * ds.
  auto hit = [&](const PlaneSpec& p, double x, double y, int ds, int dt, double& xc, double& yc) {
    const double denom = 1.0 - p.ramp * ds;
    if (denom == 0.0) return false;
    xc = (x + (p.disparity - p.ramp * calib.cx) * ds) / denom;
    yc = y + plane_magnitude(p, xc, calib.cx) * dt;
    if (!p.bounded()) return true;
    return xc >= p.x0 && xc < p.x1 && yc >= p.y0 && yc < p.y1;
  };

  std::vector<Image> views;
  for (int t = 0; t < spec.views_t; ++t)
    for (int s = 0; s < spec.views_s; ++s) {
      Image img(spec.width, spec.height, 3);
      for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x)
          for (const auto& p : planes) {
            double xc = 0.0, yc = 0.0;
            if (!hit(p, x, y, s - sc, t - tc, xc, yc)) continue;
            for (int c = 0; c < 3; ++c) {
              double v = texture(spec.texture, p.texture_seed, xc, yc, c);
              if (spec.quantize) v = std::round(v * 255.0) / 255.0;
              img.at(x, y, c) = v;
            }
            break;
          }
      views.push_back(std::move(img));
    }

  DisparityMap gt(spec.width, spec.height);
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x)
      for (const auto& p : planes) {
        double xc = 0.0, yc = 0.0;
        if (!hit(p, x, y, 0, 0, xc, yc)) continue;
        gt.set(x, y, -plane_magnitude(p, x, calib.cx));
        break;
      }
  return {LightField(spec.views_s, spec.views_t, std::move(views), calib), std::move(gt)};
}

SceneSpec constant_scene(double disparity, int size, int views) {
  SceneSpec s;
  s.views_s = s.views_t = views;
  s.width = s.height = size;
  s.planes.push_back({disparity, 0.0, 0, 0, 0, 0, 11});
  return s;
}

SceneSpec two_plane_scene(double far, double near, int size, int views) {
  SceneSpec s;
  s.views_s = s.views_t = views;
  s.width = s.height = size;
  const int lo = size * 5 / 16;
  const int hi = size * 11 / 16;
  s.planes.push_back({far, 0.0, 0, 0, 0, 0, 21});
  s.planes.push_back({near, 0.0, lo, lo, hi, hi, 37});
  return s;
}

SceneSpec ramp_scene(double d0, double d1, int size, int views) {
  SceneSpec s;
  s.views_s = s.views_t = views;
  s.width = s.height = size;
  const double ramp = (d1 - d0) / (size - 1);
  s.planes.push_back({0.5 * (d0 + d1), ramp, 0, 0, 0, 0, 53});
  return s;
}

SceneSpec scene_preset(const std::string& name, int size, int views) {
  if (name == "constant") return constant_scene(1.6, size, views);
  if (name == "two-plane") return two_plane_scene(1.0, 3.0, size, views);
  if (name == "ramp") return ramp_scene(1.0, 2.0, size, views);
  throw SpecError("unknown synthetic scene '" + name + "' (expected constant, two-plane or ramp)");
}

EvalReport run_benchmark(const LightField& lf, const DisparityMap* gt, const PipelineConfig& config, int border,
                         DepthEstimate* estimate_out) {
  EvalReport report;
  report.rng_seed = config.cpm.rng_seed;
  report.config_snapshot = pipeline_config_text(config);
  DepthEstimate est = estimate_depth(lf, config);
  report.runtime_seconds = est.timings;
  for (const auto& t : est.timings)
    if (t.stage == "total") report.total_seconds = t.seconds;
  const auto mask = border_mask(lf.width(), lf.height(), border);
  std::size_t in_mask = 0, valid = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    in_mask += mask[i];
    valid += mask[i] && est.disparity.valid[i];
  }
  report.valid_fraction = in_mask ? static_cast<double>(valid) / static_cast<double>(in_mask) : 0.0;
  if (gt) report.mse100 = mse100(est.disparity, *gt, mask);
  if (estimate_out) *estimate_out = std::move(est);
  return report;
}

std::string report_text(const EvalReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "source = " << report.source << "\n";
  out << "rng_seed = " << report.rng_seed << "\n";
  if (report.mse100) out << "mse100 = " << *report.mse100 << "\n";
  out << "valid_fraction = " << report.valid_fraction << "\n";
  for (const auto& t : report.runtime_seconds) out << "runtime." << t.stage << " = " << t.seconds << "\n";
  std::istringstream cfg(report.config_snapshot);
  std::string line;
  while (std::getline(cfg, line))
    if (!line.empty()) out << "config." << line << "\n";
  return out.str();
}

void write_report(const EvalReport& report, const std::filesystem::path& text_path,
                  const std::filesystem::path& json_path) {
  {
    std::ofstream out(text_path);
    if (!out) throw IoError("cannot write " + text_path.string());
    out << report_text(report);
  }
  nlohmann::ordered_json j;
  j["source"] = report.source;
  j["rng_seed"] = report.rng_seed;
  j["mse100"] = report.mse100 ? nlohmann::ordered_json(*report.mse100) : nlohmann::ordered_json(nullptr);
  j["valid_fraction"] = report.valid_fraction;
  for (const auto& t : report.runtime_seconds) j["runtime_seconds"][t.stage] = t.seconds;
  std::istringstream cfg(report.config_snapshot);
  std::string line;
  while (std::getline(cfg, line)) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) j["config"][line.substr(0, eq)] = line.substr(eq + 3);
  }
  std::ofstream out(json_path);
  if (!out) throw IoError("cannot write " + json_path.string());
  out << j.dump(2) << "\n";
}

}  // namespace lfdepth
