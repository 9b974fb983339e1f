#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "doctest.h"
#include "lfdepth/raster_io.hpp"
#include "oracles.hpp"
#include "tempdir.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "lfdepth");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = lfdepth::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// A small synthetic field shared by the tests below.
const fs::path& field() {
  static TempDir dir;
  static const bool made = [] {
    const Run r = run({"synth", (dir.path() / "lf").string(), "--scene", "two-plane", "--size", "48", "--views", "5"});
    REQUIRE(r.code == 0);
    return true;
  }();
  (void)made;
  static const fs::path path = dir.path() / "lf";
  return path;
}

std::size_t ply_count(const fs::path& p) { return oracle::read_ply(slurp(p)).size(); }

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(run({"--help"}).code == 0);
  CHECK(run({}).code == 1);
  CHECK(run({"depth"}).code == 1);
  CHECK(run({"depth", "x", "--no-such-flag", "1"}).code == 1);
}

TEST_CASE("depth on a valid field writes three files") {
  TempDir out;
  const Run r = run({"depth", field().string(), "-o", out.path().string()});
  CHECK(r.code == 0);
  for (const char* f : {"disparity.pfm", "depth.pfm", "depth.png"}) CHECK(fs::exists(out.path() / f));
  CHECK(lfdepth::read_pfm(out.path() / "depth.pfm").width() == 48);
}

TEST_CASE("missing directory exits with the structure code") {
  const Run r = run({"depth", "/nonexistent/light/field"});
  CHECK(r.code == 2);
  CHECK(r.err.find("not found") != std::string::npos);
}

TEST_CASE("bad calibration exits with the calibration code") {
  TempDir dir;
  fs::copy(field(), dir.path() / "lf", fs::copy_options::recursive);
  std::string params = slurp(dir.path() / "lf" / "parameters.cfg");
  const auto at = params.find("baseline_mm");
  REQUIRE(at != std::string::npos);
  const auto eol = params.find('\n', at);
  params.replace(at, eol - at, "baseline_mm = 0");
  std::ofstream(dir.path() / "lf" / "parameters.cfg") << params;
  CHECK(run({"depth", (dir.path() / "lf").string(), "-o", (dir.path() / "out").string()}).code == 4);
}

TEST_CASE("fixed seed and rows give bit-identical outputs") {
  TempDir a, b;
  const std::string in = field().string();
  REQUIRE(run({"depth", in, "--rows", "4", "--cols", "4", "--seed", "7", "-o", a.path().string()}).code == 0);
  REQUIRE(run({"depth", in, "--rows", "4", "--cols", "4", "--seed", "7", "--threads", "3", "-o", b.path().string()})
              .code == 0);
  CHECK(slurp(a.path() / "disparity.pfm") == slurp(b.path() / "disparity.pfm"));
  CHECK(slurp(a.path() / "depth.pfm") == slurp(b.path() / "depth.pfm"));
  CHECK(slurp(a.path() / "depth.png") == slurp(b.path() / "depth.png"));
}

TEST_CASE("point cloud modes") {
  TempDir single, dense, dedup;
  const std::string in = field().string();
  REQUIRE(run({"pointcloud", in, "-o", single.path().string()}).code == 0);
  REQUIRE(run({"pointcloud", in, "--dense", "true", "-o", dense.path().string()}).code == 0);
  REQUIRE(run({"pointcloud", in, "--dense", "true", "--dedup", "0.001", "-o", dedup.path().string()}).code == 0);
  const std::size_t n1 = ply_count(single.path() / "cloud.ply");
  const std::size_t nd = ply_count(dense.path() / "cloud.ply");
  const std::size_t nv = ply_count(dedup.path() / "cloud.ply");
  CHECK(n1 > 0);
  CHECK(nd >= n1);
  CHECK(nv <= nd);
}

TEST_CASE("eval reports") {
  TempDir out;
  Run r = run({"eval", "--synthetic", "constant", "--size", "48", "--views", "3", "-o", out.path().string()});
  CHECK(r.code == 0);
  CHECK(slurp(out.path() / "report.txt").find("mse100 = ") != std::string::npos);
  CHECK(fs::exists(out.path() / "report.json"));

  // ground truth is picked up from the field directory
  TempDir with_gt;
  r = run({"eval", field().string(), "--rows", "center", "--cols", "none", "-o", with_gt.path().string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("mse100") != std::string::npos);

  TempDir dir;
  fs::copy(field(), dir.path() / "lf", fs::copy_options::recursive);
  fs::remove(dir.path() / "lf" / "gt_disp_lowres.pfm");
  r = run({"eval", (dir.path() / "lf").string(), "--cols", "none", "-o", (dir.path() / "out").string()});
  CHECK(r.code == 0);
  CHECK(slurp(dir.path() / "out" / "report.txt").find("mse100") == std::string::npos);
  CHECK(slurp(dir.path() / "out" / "report.txt").find("runtime.total") != std::string::npos);

  std::ofstream(dir.path() / "bad.pfm") << "P7\nnot a pfm\n";
  r = run({"eval", (dir.path() / "lf").string(), "--gt", (dir.path() / "bad.pfm").string(), "-o",
           (dir.path() / "out").string()});
  CHECK(r.code == 3);
}

TEST_CASE("environment and config file feed the configuration") {
  TempDir dir;
  std::ofstream(dir.path() / "lf.cfg") << "rows = none\ncols = none\n";
  // no volume selected: the file was honoured
  CHECK(run({"depth", field().string(), "-c", (dir.path() / "lf.cfg").string(), "-o", dir.path().string()}).code == 2);
  CHECK(run({"depth", field().string(), "-c", (dir.path() / "lf.cfg").string(), "--rows", "center", "-o",
             dir.path().string()})
            .code == 0);
  CHECK(run({"depth", field().string(), "--dt-sigma-s", "-3"}).code == 2);

  ::setenv("LFDEPTH_COLS", "none", 1);
  ::setenv("LFDEPTH_ROWS", "none", 1);
  const int from_env = run({"depth", field().string(), "-o", dir.path().string()}).code;
  const int flag_wins = run({"depth", field().string(), "--rows", "center", "-o", dir.path().string()}).code;
  ::unsetenv("LFDEPTH_COLS");
  ::unsetenv("LFDEPTH_ROWS");
  CHECK(from_env == 2);
  CHECK(flag_wins == 0);
}

TEST_CASE("flow-debug dumps every pair") {
  TempDir out;
  const Run r = run({"flow-debug", field().string(), "--cols", "none", "-o", out.path().string()});
  CHECK(r.code == 0);
  for (int n = 0; n < 4; ++n) {
    const std::string stem = "row2_pair" + std::to_string(n);
    CHECK(fs::exists(out.path() / (stem + "_sparse.txt")));
    CHECK(fs::exists(out.path() / (stem + "_flow.pfm")));
    CHECK(fs::exists(out.path() / (stem + "_confidence.pfm")));
  }
}
