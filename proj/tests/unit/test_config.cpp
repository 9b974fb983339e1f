#include <fstream>
#include <map>

#include "doctest.h"
#include "lfdepth/config.hpp"
#include "lfdepth/errors.hpp"
#include "tempdir.hpp"

using namespace lfdepth;

TEST_CASE("defaults") {
  const Config c;
  CHECK(c.pipeline.cpm.levels == 5);
  CHECK(c.pipeline.cpm.eta == 0.5);
  CHECK(c.pipeline.cpm.patch == 3);
  CHECK(c.pipeline.dt.sigma_s == 30.0);
  CHECK(c.pipeline.dt.sigma_r == 0.08);
  CHECK(c.pipeline.dt.sigma_a == 2.0);
  CHECK(c.pipeline.dt.iterations == 3);
  CHECK_FALSE(c.dense);
  CHECK(c.dedup == 0.0);
  CHECK(c.eval_border == 16);
}

TEST_CASE("setting values by key") {
  Config c;
  set_config_value(c, "seed", "7");
  set_config_value(c, "cpm_tau_fb", "2.5");
  set_config_value(c, "dt_sigma_r", "0.1");
  set_config_value(c, "dense", "true");
  set_config_value(c, "rows", "0,4");
  set_config_value(c, "cols", "none");
  set_config_value(c, "ply_format", "ascii");
  CHECK(c.pipeline.cpm.rng_seed == 7);
  CHECK(c.pipeline.cpm.tau_fb == 2.5);
  CHECK(c.pipeline.dt.sigma_r == 0.1);
  CHECK(c.dense);
  CHECK(c.pipeline.rows == std::vector<int>{0, 4});
  CHECK(c.pipeline.cols.empty());
  CHECK(c.ply_format == PlyFormat::Ascii);
  set_config_value(c, "rows", "center");
  CHECK(c.pipeline.rows == std::vector<int>{kCenterIndex});

  CHECK_THROWS_AS(set_config_value(c, "no_such_key", "1"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "cpm_levels", "many"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "cpm_levels", "3.5"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "dense", "maybe"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "ply_format", "xml"), ConfigError);
  CHECK(ConfigError("x").exit_code() == 1);
}

TEST_CASE("config text with comments") {
  Config c;
  apply_config_text(c, "# comment\nseed = 9   # trailing\n\n dt_iterations=2\n");
  CHECK(c.pipeline.cpm.rng_seed == 9);
  CHECK(c.pipeline.dt.iterations == 2);
  CHECK_THROWS_AS(apply_config_text(c, "seed 9\n"), ConfigError);
}

TEST_CASE("file < environment < explicit values") {
  TempDir dir;
  {
    std::ofstream f(dir.path() / "lf.cfg");
    f << "seed = 1\ncpm_iterations = 4\ndt_sigma_s = 12\n";
  }
  Config c;
  load_config_file(c, dir.path() / "lf.cfg");
  const std::map<std::string, std::string> env{{"LFDEPTH_SEED", "2"}, {"LFDEPTH_DT_SIGMA_S", "14"}};
  apply_environment(c, [&](const std::string& name) -> std::optional<std::string> {
    const auto it = env.find(name);
    if (it == env.end()) return std::nullopt;
    return it->second;
  });
  set_config_value(c, "seed", "3");
  CHECK(c.pipeline.cpm.rng_seed == 3);
  CHECK(c.pipeline.dt.sigma_s == 14.0);
  CHECK(c.pipeline.cpm.iterations == 4);
  CHECK_THROWS_AS(load_config_file(c, dir.path() / "missing.cfg"), IoError);
}

TEST_CASE("config text round trip") {
  Config c;
  set_config_value(c, "dt_sigma_r", "0.1234567890123");
  set_config_value(c, "rows", "1,2,3");
  set_config_value(c, "output", "somewhere");
  Config back;
  apply_config_text(back, config_text(c));
  CHECK(config_text(back) == config_text(c));
  CHECK(back.pipeline.dt.sigma_r == c.pipeline.dt.sigma_r);

  const PipelineConfig p = pipeline_config_from_text(pipeline_config_text(c.pipeline));
  CHECK(pipeline_config_text(p) == pipeline_config_text(c.pipeline));
  CHECK(pipeline_config_text(c.pipeline).find("output") == std::string::npos);
  for (const auto& k : config_keys()) CHECK(find_config_key(k.name) == &k);
}
