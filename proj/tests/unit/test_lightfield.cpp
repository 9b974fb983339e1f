#include <cmath>
#include <fstream>

#include "doctest.h"
#include "lfdepth/bench.hpp"
#include "lfdepth/errors.hpp"
#include "lfdepth/lightfield.hpp"
#include "oracles.hpp"
#include "tempdir.hpp"

using namespace lfdepth;

namespace {

LightField small_field(int S, int T, int w = 8, int h = 6) {
  std::vector<Image> views;
  for (int t = 0; t < T; ++t)
    for (int s = 0; s < S; ++s) views.emplace_back(w, h, 3, 0.1 * s + 0.01 * t);
  return LightField(S, T, std::move(views), Calibration{100.0, 0.5, (w - 1) / 2.0, (h - 1) / 2.0});
}

}  // namespace

TEST_CASE("light field validates structure") {
  CHECK_THROWS_AS(small_field(1, 1), StructureError);
  CHECK_NOTHROW(small_field(2, 1));
  std::vector<Image> views{Image(4, 4, 3), Image(5, 4, 3)};
  CHECK_THROWS_AS(LightField(2, 1, views, Calibration{}), StructureError);
  std::vector<Image> gray{Image(4, 4, 1), Image(4, 4, 1)};
  CHECK_THROWS_AS(LightField(2, 1, gray, Calibration{}), StructureError);
  std::vector<Image> few{Image(4, 4, 3)};
  CHECK_THROWS_AS(LightField(2, 1, few, Calibration{}), StructureError);
}

TEST_CASE("volume extraction follows the requested axis") {
  const LightField lf = small_field(5, 3);
  const auto row = extract_volume(lf, Axis::Row, 1);
  REQUIRE(row.size() == 5);
  for (int s = 0; s < 5; ++s) CHECK(row.images[s] == lf.view(s, 1));
  const auto col = extract_volume(lf, Axis::Column, 4);
  REQUIRE(col.size() == 3);
  for (int t = 0; t < 3; ++t) CHECK(col.images[t] == lf.view(4, t));
  CHECK_THROWS_AS(extract_volume(lf, Axis::Row, 3), IndexError);
  CHECK_THROWS_AS(extract_volume(lf, Axis::Column, -1), IndexError);
  CHECK_THROWS_AS(extract_volume(small_field(5, 1), Axis::Column, 0), IndexError);
}

TEST_CASE("disparity and depth convert both ways") {
  const Calibration calib{200.0, 0.1, 0, 0};
  DisparityMap d(3, 1);
  d.set(0, 0, -2.0);
  d.set(1, 0, 0.0);
  const DepthMap z = disparity_to_depth(d, calib);
  CHECK(z.at(0, 0) == doctest::Approx(10.0));
  CHECK_FALSE(z.is_valid(1, 0));
  CHECK_FALSE(z.is_valid(2, 0));
  const DisparityMap back = depth_to_disparity(z, calib);
  CHECK(back.at(0, 0) == doctest::Approx(-2.0));
  CHECK_THROWS_AS(disparity_to_depth(d, Calibration{0.0, 1.0, 0, 0}), CalibrationError);
}

TEST_CASE("hci directories round trip and report structure problems") {
  TempDir dir;
  const SyntheticScene scene = make_synthetic_lightfield(constant_scene(1.0, 32, 3));
  write_hci(dir.path(), scene.light_field);
  const LightField back = load_hci(dir.path());
  CHECK(back.angular_width() == 3);
  CHECK(back.angular_height() == 3);
  CHECK(back.calibration().focal_length_px == doctest::Approx(scene.light_field.calibration().focal_length_px));
  CHECK(back.calibration().baseline == doctest::Approx(scene.light_field.calibration().baseline));
  for (std::size_t i = 0; i < back.views().size(); ++i) CHECK(back.views()[i] == scene.light_field.views()[i]);

  CHECK_THROWS_AS(load_hci(dir / "missing"), StructureError);

  std::filesystem::remove(dir / "input_Cam004.png");
  CHECK_THROWS_AS(load_hci(dir.path()), StructureError);
}

TEST_CASE("hci calibration problems raise CalibrationError") {
  TempDir dir;
  const SyntheticScene scene = make_synthetic_lightfield(constant_scene(1.0, 24, 2));
  write_hci(dir.path(), scene.light_field);
  std::ofstream(dir / "parameters.cfg") << "focal_length_mm = abc\nsensor_size_mm = 35\nimage_resolution_x_px = 24\n"
                                           "baseline_mm = 1\nnum_cams_x = 2\nnum_cams_y = 2\n";
  CHECK_THROWS_AS(load_hci(dir.path()), CalibrationError);
  std::ofstream(dir / "parameters.cfg") << "focal_length_mm = 50\nimage_resolution_x_px = 24\n"
                                           "baseline_mm = 1\nnum_cams_x = 2\nnum_cams_y = 2\n";
  CHECK_THROWS_AS(load_hci(dir.path()), CalibrationError);
  std::ofstream(dir / "parameters.cfg") << "focal_length_mm = 50\nsensor_size_mm = 35\nimage_resolution_x_px = 30\n"
                                           "baseline_mm = 1\nnum_cams_x = 2\nnum_cams_y = 2\n";
  CHECK_THROWS_AS(load_hci(dir.path()), StructureError);
}

TEST_CASE("masked maps convert to images with NaN for invalid pixels") {
  DisparityMap d(2, 2);
  d.set(1, 1, -0.5);
  const Image img = to_image(d);
  CHECK(std::isnan(img.at(0, 0)));
  CHECK(img.at(1, 1) == -0.5);
  const DisparityMap back = map_from_image<DisparityMap>(img);
  CHECK(back == d);
  CHECK(back.valid_count() == 1);
}
