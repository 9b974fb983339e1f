#include "lfdepth/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <type_traits>

#include "lfdepth/errors.hpp"

namespace lfdepth {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a number, got '" + v + "'");
}

template <typename T>
T parse_int(const std::string& key, const std::string& v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  std::string l = v;
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
  if (l == "1" || l == "true" || l == "on" || l == "yes") return true;
  if (l == "0" || l == "false" || l == "off" || l == "no") return false;
  throw ConfigError(key + ": expected on/off, got '" + v + "'");
}

std::string fmt_indices(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += v[i] == kCenterIndex ? std::string("center") : std::to_string(v[i]);
  }
  return out.empty() ? "none" : out;
}

std::vector<int> parse_indices(const std::string& key, const std::string& v) {
  std::vector<int> out;
  if (trim(v) == "none") return out;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok == "center" || tok == "c") {
      out.push_back(kCenterIndex);
      continue;
    }
    const int i = parse_int<int>(key, tok);
    if (i < 0) throw ConfigError(key + ": indices must be non-negative");
    out.push_back(i);
  }
  return out;
}


template <typename Field>
ConfigKey make_key(std::string name, std::string help, bool pipeline, Field field) {
  using T = std::remove_reference_t<decltype(field(std::declval<Config&>()))>;
  ConfigKey k{name, std::move(help), pipeline, {}, {}};
  k.get = [field](const Config& c) {
    auto& v = field(const_cast<Config&>(c));
    if constexpr (std::is_same_v<T, double>) return fmt_double(v);
    else if constexpr (std::is_same_v<T, bool>) return std::string(v ? "on" : "off");
    else if constexpr (std::is_same_v<T, std::string>) return v;
    else if constexpr (std::is_same_v<T, std::vector<int>>) return fmt_indices(v);
    else return std::to_string(v);
  };
  k.set = [field, name](Config& c, const std::string& s) {
    auto& v = field(c);
    if constexpr (std::is_same_v<T, double>) v = parse_double(name, s);
    else if constexpr (std::is_same_v<T, bool>) v = parse_bool(name, s);
    else if constexpr (std::is_same_v<T, std::string>) v = s;
    else if constexpr (std::is_same_v<T, std::vector<int>>) v = parse_indices(name, s);
    else v = parse_int<T>(name, s);
  };
  return k;
}

#define LF_KEY(name, help, pipeline, expr) make_key(name, help, pipeline, [](Config& c) -> auto& { return expr; })

std::vector<ConfigKey> build_keys() {
  std::vector<ConfigKey> keys{
      LF_KEY("descriptor_cell_size", "descriptor cell width in pixels", true, c.pipeline.cpm.descriptor.cell_size),
      LF_KEY("descriptor_cells", "descriptor cells per side", true, c.pipeline.cpm.descriptor.cells),
      LF_KEY("descriptor_bins", "orientation bins per cell", true, c.pipeline.cpm.descriptor.bins),
      LF_KEY("descriptor_clamp", "descriptor clamp before renormalisation", true, c.pipeline.cpm.descriptor.clamp),
      LF_KEY("descriptor_window_sigma", "Gaussian window sigma / support", true,
             c.pipeline.cpm.descriptor.window_sigma),
      LF_KEY("cpm_levels", "pyramid levels k", true, c.pipeline.cpm.levels),
      LF_KEY("cpm_eta", "pyramid downsampling factor", true, c.pipeline.cpm.eta),
      LF_KEY("cpm_patch", "matching patch width in pixels", true, c.pipeline.cpm.patch),
      LF_KEY("cpm_seed_spacing", "seed lattice spacing in pixels", true, c.pipeline.cpm.seed_spacing),
      LF_KEY("cpm_iterations", "propagation and search iterations per level", true, c.pipeline.cpm.iterations),
      LF_KEY("cpm_radius", "search window radius, 0 = whole image", true, c.pipeline.cpm.radius),
      LF_KEY("cpm_tau_fb", "forward-backward rejection threshold in pixels", true, c.pipeline.cpm.tau_fb),
      LF_KEY("cpm_sigma_c", "confidence falloff in pixels", true, c.pipeline.cpm.sigma_c),
      LF_KEY("cpm_subpixel", "sub-pixel refinement of matches", true, c.pipeline.cpm.subpixel),
      LF_KEY("cpm_epipolar", "restrict matches to the epipolar line", true, c.pipeline.cpm.epipolar),
      LF_KEY("seed", "random seed", true, c.pipeline.cpm.rng_seed),
      LF_KEY("dt_sigma_s", "feature flow spatial sigma", true, c.pipeline.dt.sigma_s),
      LF_KEY("dt_sigma_r", "feature flow range sigma", true, c.pipeline.dt.sigma_r),
      LF_KEY("dt_sigma_a", "feature flow angular sigma in views", true, c.pipeline.dt.sigma_a),
      LF_KEY("dt_sigma_d", "angular range width for disparity change along paths", true, c.pipeline.dt.sigma_d),
      LF_KEY("dt_iterations", "feature flow iterations", true, c.pipeline.dt.iterations),
      LF_KEY("refine_lambda", "refinement smoothness weight, 0 disables", true, c.pipeline.refine.lambda),
      LF_KEY("refine_kappa", "refinement edge sensitivity", true, c.pipeline.refine.kappa),
      LF_KEY("refine_epsilon", "refinement robust penalty epsilon", true, c.pipeline.refine.epsilon),
      LF_KEY("refine_fixed_point_iterations", "lagged reweighting steps", true,
             c.pipeline.refine.fixed_point_iterations),
      LF_KEY("refine_inner_iterations", "conjugate gradient iterations", true, c.pipeline.refine.inner_iterations),
      LF_KEY("refine_tolerance", "conjugate gradient relative tolerance", true, c.pipeline.refine.tolerance),
      LF_KEY("refine_guide_sigma_s", "edge map smoothing spatial sigma", true, c.pipeline.refine.guide_sigma_s),
      LF_KEY("refine_guide_sigma_r", "edge map smoothing range sigma", true, c.pipeline.refine.guide_sigma_r),
      LF_KEY("rows", "row volumes: comma list of t indices or 'center'", true, c.pipeline.rows),
      LF_KEY("cols", "column volumes: comma list of s indices or 'center'", true, c.pipeline.cols),
      LF_KEY("threads", "worker threads, 0 = default", false, c.threads),
      LF_KEY("dense", "back-project every view", false, c.dense),
      LF_KEY("dedup", "voxel size for point deduplication, 0 = off", false, c.dedup),
      LF_KEY("eval_border", "pixels excluded along each edge when scoring", false, c.eval_border),
      LF_KEY("output", "output directory", false, c.output),
      LF_KEY("hci_view_pattern", "view file name pattern", false, c.layout.view_pattern),
      LF_KEY("hci_params_file", "parameter file name", false, c.layout.params_file),
      LF_KEY("hci_key_focal_length", "focal length key", false, c.layout.key_focal_length),
      LF_KEY("hci_key_sensor_size", "sensor size key", false, c.layout.key_sensor_size),
      LF_KEY("hci_key_image_width", "image width key", false, c.layout.key_image_width),
      LF_KEY("hci_key_baseline", "baseline key", false, c.layout.key_baseline),
      LF_KEY("hci_key_cams_x", "horizontal camera count key", false, c.layout.key_cams_x),
      LF_KEY("hci_key_cams_y", "vertical camera count key", false, c.layout.key_cams_y),
  };
  ConfigKey ply{"ply_format", "ascii or binary", false, {}, {}};
  ply.get = [](const Config& c) {
    return std::string(c.ply_format == PlyFormat::Ascii ? "ascii" : "binary");
  };
  ply.set = [](Config& c, const std::string& v) {
    if (v == "ascii") c.ply_format = PlyFormat::Ascii;
    else if (v == "binary") c.ply_format = PlyFormat::BinaryLittleEndian;
    else throw ConfigError("ply_format: expected ascii or binary, got '" + v + "'");
  };
  keys.push_back(std::move(ply));
  return keys;
}

#undef LF_KEY

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = build_keys();
  return keys;
}

const ConfigKey* find_config_key(const std::string& name) {
  for (const auto& k : config_keys())
    if (k.name == name) return &k;
  return nullptr;
}

void set_config_value(Config& config, const std::string& key, const std::string& value) {
  const ConfigKey* k = find_config_key(key);
  if (!k) throw ConfigError("unknown configuration key '" + key + "'");
  k->set(config, trim(value));
}

void apply_config_text(Config& config, const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(number) + ": expected 'key = value'");
    set_config_value(config, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

void load_config_file(Config& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(config, ss.str(), path.string());
}

void apply_environment(Config& config,
                       const std::function<std::optional<std::string>(const std::string&)>& lookup) {
  for (const auto& k : config_keys()) {
    std::string var = kEnvPrefix;
    for (char ch : k.name) var += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    std::optional<std::string> value;
    if (lookup) {
      value = lookup(var);
    } else if (const char* env = std::getenv(var.c_str())) {
      value = env;
    }
    if (value) k.set(config, trim(*value));
  }
}

std::string config_text(const Config& config) {
  std::string out;
  for (const auto& k : config_keys()) out += k.name + " = " + k.get(config) + "\n";
  return out;
}

std::string pipeline_config_text(const PipelineConfig& pipeline) {
  Config c;
  c.pipeline = pipeline;
  std::string out;
  for (const auto& k : config_keys())
    if (k.pipeline) out += k.name + " = " + k.get(c) + "\n";
  return out;
}

PipelineConfig pipeline_config_from_text(const std::string& text) {
  Config c;
  apply_config_text(c, text, "snapshot");
  return c.pipeline;
}

}  // namespace lfdepth
