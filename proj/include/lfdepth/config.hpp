#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lfdepth/lightfield.hpp"
#include "lfdepth/pipeline.hpp"
#include "lfdepth/pointcloud.hpp"

namespace lfdepth {

struct Config {
  PipelineConfig pipeline;
  HciLayout layout;
  int threads = 0;  // 0 = OpenMP default
  bool dense = false;
  double dedup = 0.0;
  PlyFormat ply_format = PlyFormat::BinaryLittleEndian;
  int eval_border = 16;
  std::string output = "out";
};

struct ConfigKey {
  std::string name;
  std::string help;
  bool pipeline;  // part of the reproducibility snapshot
  std::function<std::string(const Config&)> get;
  std::function<void(Config&, const std::string&)> set;
};

const std::vector<ConfigKey>& config_keys();
const ConfigKey* find_config_key(const std::string& name);

// Throws ConfigError for unknown keys or bad values.
void set_config_value(Config& config, const std::string& key, const std::string& value);

// Flat "key = value" lines; '#' starts a comment.
void apply_config_text(Config& config, const std::string& text, const std::string& origin = "config");
void load_config_file(Config& config, const std::filesystem::path& path);

inline constexpr const char* kEnvPrefix = "LFDEPTH_";

// LFDEPTH_<KEY> for every key, upper-cased. `lookup` defaults to getenv.
void apply_environment(Config& config,
                       const std::function<std::optional<std::string>(const std::string&)>& lookup = {});

std::string config_text(const Config& config);
// Only the keys that influence the estimate.
std::string pipeline_config_text(const PipelineConfig& pipeline);
PipelineConfig pipeline_config_from_text(const std::string& text);

}  // namespace lfdepth
