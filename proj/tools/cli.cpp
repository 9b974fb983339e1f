#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>

#include "CLI11.hpp"
#include "lfdepth/bench.hpp"
#include "lfdepth/config.hpp"
#include "lfdepth/errors.hpp"
#include "lfdepth/parallel.hpp"
#include "lfdepth/pointcloud.hpp"
#include "lfdepth/raster_io.hpp"

namespace fs = std::filesystem;

namespace lfdepth::cli {

namespace {

struct Options {
  std::string input;
  std::string config_file;
  std::map<std::string, std::string> flags;  // key -> value given on the command line
  std::string gt;
  std::string synthetic;
  int synthetic_size = 128;
  int synthetic_views = 5;
};

std::string flag_name(const std::string& key) {
  std::string f = key;
  std::replace(f.begin(), f.end(), '_', '-');
  return "--" + f;
}

void add_config_flags(CLI::App& cmd, Options& opt) {
  cmd.add_option("-c,--config", opt.config_file, "flat key = value configuration file");
  for (const auto& k : config_keys()) {
    std::string names = flag_name(k.name);
    if (k.name == "output") names = "-o," + names;
    cmd.add_option_function<std::string>(
        names, [&opt, name = k.name](const std::string& v) { opt.flags[name] = v; }, k.help);
  }
}

// defaults < config file < environment < flags
Config resolve_config(const Options& opt) {
  Config config;
  if (!opt.config_file.empty()) load_config_file(config, opt.config_file);
  apply_environment(config);
  for (const auto& [key, value] : opt.flags) set_config_value(config, key, value);
  set_num_threads(config.threads);
  return config;
}

void write_depth_outputs(const fs::path& dir, const DepthEstimate& est, std::ostream& out) {
  fs::create_directories(dir);
  write_pfm(dir / "disparity.pfm", to_image(est.disparity));
  write_pfm(dir / "depth.pfm", to_image(est.depth));
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t i = 0; i < est.depth.values.size(); ++i)
    if (est.depth.valid[i]) {
      lo = std::min(lo, est.depth.values[i]);
      hi = std::max(hi, est.depth.values[i]);
    }
  Image vis(est.depth.width, est.depth.height, 1);
  // Near is bright; invalid pixels stay black.
  for (int y = 0; y < vis.height(); ++y)
    for (int x = 0; x < vis.width(); ++x)
      vis.at(x, y) = est.depth.is_valid(x, y) ? hi - est.depth.values[static_cast<std::size_t>(y) * vis.width() + x]
                                              : 0.0;
  if (!(hi > lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  write_png_gray16(dir / "depth.png", vis, 0.0, hi - lo);
  std::ofstream side(dir / "depth.png.txt");
  side.precision(17);
  side << "encoding = 16-bit gray, value = (depth_max - depth) / (depth_max - depth_min), invalid = 0\n"
       << "depth_min = " << lo << "\ndepth_max = " << hi << "\n";
  out << "wrote " << (dir / "disparity.pfm").string() << ", " << (dir / "depth.pfm").string() << ", "
      << (dir / "depth.png").string() << "\n";
}

int cmd_depth(const Options& opt, std::ostream& out) {
  const Config config = resolve_config(opt);
  const LightField lf = load_hci(opt.input, config.layout);
  const DepthEstimate est = estimate_depth(lf, config.pipeline);
  write_depth_outputs(config.output, est, out);
  return 0;
}

int cmd_pointcloud(const Options& opt, std::ostream& out) {
  const Config config = resolve_config(opt);
  const LightField lf = load_hci(opt.input, config.layout);
  const DepthEstimate est = estimate_depth(lf, config.pipeline);
  const PointCloud cloud = light_field_point_cloud(lf, est.disparity, config.dense, config.dedup);
  fs::create_directories(config.output);
  const fs::path path = fs::path(config.output) / "cloud.ply";
  write_ply(cloud, path, config.ply_format);
  out << "wrote " << cloud.size() << " points to " << path.string() << "\n";
  return 0;
}

int cmd_eval(const Options& opt, std::ostream& out) {
  const Config config = resolve_config(opt);
  std::optional<SyntheticScene> scene;
  std::optional<LightField> loaded;
  std::optional<DisparityMap> gt;
  std::string source;
  if (!opt.synthetic.empty()) {
    scene = make_synthetic_lightfield(scene_preset(opt.synthetic, opt.synthetic_size, opt.synthetic_views));
    gt = scene->ground_truth;
    source = "synthetic:" + opt.synthetic + ":" + std::to_string(opt.synthetic_size) + ":" +
             std::to_string(opt.synthetic_views);
  } else {
    if (opt.input.empty()) throw StructureError("eval needs an input directory or --synthetic");
    loaded = load_hci(opt.input, config.layout);
    source = opt.input;
    fs::path gt_path = opt.gt;
    if (gt_path.empty() && fs::exists(fs::path(opt.input) / "gt_disp_lowres.pfm"))
      gt_path = fs::path(opt.input) / "gt_disp_lowres.pfm";
    if (!gt_path.empty()) {
      Image g = read_pfm(gt_path);
      if (g.channels() != 1) throw FormatError("ground truth must be a single-channel PFM");
      gt = map_from_image<DisparityMap>(g);
    }
  }
  const LightField& lf = scene ? scene->light_field : *loaded;
  EvalReport report = run_benchmark(lf, gt ? &*gt : nullptr, config.pipeline, config.eval_border);
  report.source = source;
  fs::create_directories(config.output);
  write_report(report, fs::path(config.output) / "report.txt", fs::path(config.output) / "report.json");
  if (report.mse100)
    out << "mse100 = " << *report.mse100 << "\n";
  else
    out << "no ground truth; runtimes only\n";
  out << "valid_fraction = " << report.valid_fraction << "\n";
  return 0;
}

int cmd_flow_debug(const Options& opt, std::ostream& out) {
  const Config config = resolve_config(opt);
  const LightField lf = load_hci(opt.input, config.layout);
  const fs::path dir = config.output;
  fs::create_directories(dir);
  for (const auto& [axis, fixed] : selected_volumes(lf, config.pipeline)) {
    const VolumeFlows vf = estimate_volume_flows(lf, axis, fixed, config.pipeline);
    for (int n = 0; n < vf.flows.size(); ++n) {
      const std::string stem = std::string(axis_name(axis)) + std::to_string(fixed) + "_pair" + std::to_string(n);
      std::ofstream txt(dir / (stem + "_sparse.txt"));
      write_matches(txt, vf.sparse[static_cast<std::size_t>(n)]);
      write_pfm(dir / (stem + "_flow.pfm"), vf.flows.flows[static_cast<std::size_t>(n)]);
      write_pfm(dir / (stem + "_confidence.pfm"), vf.flows.confidences[static_cast<std::size_t>(n)]);
      out << stem << ": " << vf.sparse[static_cast<std::size_t>(n)].matches.size() << " sparse matches\n";
    }
  }
  return 0;
}

int cmd_synth(const Options& opt, std::ostream& out) {
  const Config config = resolve_config(opt);
  const SceneSpec spec = scene_preset(opt.synthetic.empty() ? "constant" : opt.synthetic, opt.synthetic_size,
                                      opt.synthetic_views);
  const SyntheticScene scene = make_synthetic_lightfield(spec);
  write_hci(opt.input, scene.light_field, 35.0, config.layout);
  write_pfm(fs::path(opt.input) / "gt_disp_lowres.pfm", to_image(scene.ground_truth));
  out << "wrote " << spec.views_s * spec.views_t << " views to " << opt.input << "\n";
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Depth maps and dense point clouds from 4D light fields"};
  app.require_subcommand(1);
  Options opt;

  auto* depth = app.add_subcommand("depth", "estimate disparity and depth for the center view");
  auto* cloud = app.add_subcommand("pointcloud", "estimate depth and write a fused PLY point cloud");
  auto* eval = app.add_subcommand("eval", "score the estimate against ground truth and write a report");
  auto* flow = app.add_subcommand("flow-debug", "dump per-pair sparse matches and dense flows");
  auto* synth = app.add_subcommand("synth", "write a synthetic light field in HCI layout");

  for (auto* cmd : {depth, cloud, flow}) {
    cmd->add_option("input", opt.input, "light-field directory")->required();
    add_config_flags(*cmd, opt);
  }
  eval->add_option("input", opt.input, "light-field directory");
  eval->add_option("--gt", opt.gt, "ground-truth disparity PFM");
  eval->add_option("--synthetic", opt.synthetic, "constant, two-plane or ramp")->excludes("input");
  add_config_flags(*eval, opt);
  synth->add_option("outdir", opt.input, "output directory")->required();
  synth->add_option("--scene", opt.synthetic, "constant, two-plane or ramp");
  add_config_flags(*synth, opt);
  for (auto* cmd : {eval, synth}) {
    cmd->add_option("--size", opt.synthetic_size, "synthetic view size in pixels");
    cmd->add_option("--views", opt.synthetic_views, "synthetic views per angular axis");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*depth) return cmd_depth(opt, out);
    if (*cloud) return cmd_pointcloud(opt, out);
    if (*eval) return cmd_eval(opt, out);
    if (*flow) return cmd_flow_debug(opt, out);
    if (*synth) return cmd_synth(opt, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace lfdepth::cli
