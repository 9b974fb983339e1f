#include "lfdepth/raster_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "lfdepth/errors.hpp"

namespace lfdepth {

namespace {

std::uint32_t byteswap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0x0000FF00u) | ((v << 8) & 0x00FF0000u) | (v << 24);
}

}  // namespace

Image read_pfm(std::istream& in) {
  std::string magic;
  if (!(in >> magic)) throw FormatError("PFM: missing header");
  int channels = 0;
  if (magic == "Pf") {
    channels = 1;
  } else if (magic == "PF") {
    channels = 3;
  } else {
    throw FormatError("PFM: bad magic '" + magic + "'");
  }
  long long width = 0, height = 0;
  double scale = 0.0;
  if (!(in >> width >> height)) throw FormatError("PFM: bad dimensions line");
  if (!(in >> scale)) throw FormatError("PFM: bad scale line");
  if (width <= 0 || height <= 0 || width > (1 << 20) || height > (1 << 20))
    throw FormatError("PFM: implausible dimensions");
  if (scale == 0.0 || !std::isfinite(scale)) throw FormatError("PFM: scale must be nonzero");
  if (!std::isspace(in.get())) throw FormatError("PFM: header not terminated by whitespace");

  const bool file_little = scale < 0.0;
  const bool host_little = std::endian::native == std::endian::little;
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                            static_cast<std::size_t>(channels);
  std::vector<std::uint32_t> raw(count);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count * 4));
  if (static_cast<std::size_t>(in.gcount()) != count * 4) throw FormatError("PFM: short payload");

  Image img(static_cast<int>(width), static_cast<int>(height), channels);
  const std::size_t row_len = static_cast<std::size_t>(width) * static_cast<std::size_t>(channels);
  for (long long y = 0; y < height; ++y) {
    const std::size_t src_row = static_cast<std::size_t>(height - 1 - y) * row_len;
    auto dst = img.row(static_cast<int>(y));
    for (std::size_t i = 0; i < row_len; ++i) {
      std::uint32_t bits = raw[src_row + i];
      if (file_little != host_little) bits = byteswap32(bits);
      dst[i] = static_cast<double>(std::bit_cast<float>(bits));
    }
  }
  return img;
}

Image read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("PFM: cannot open " + path.string());
  return read_pfm(in);
}

void write_pfm(std::ostream& out, const Image& img) {
  if (img.channels() != 1 && img.channels() != 3) throw FormatError("PFM: only 1 or 3 channels");
  const bool host_little = std::endian::native == std::endian::little;
  out << (img.channels() == 1 ? "Pf" : "PF") << "\n" << img.width() << " " << img.height() << "\n"
      << (host_little ? "-1.0" : "1.0") << "\n";
  const std::size_t row_len = static_cast<std::size_t>(img.width()) * static_cast<std::size_t>(img.channels());
  std::vector<float> buf(row_len);
  for (int y = img.height() - 1; y >= 0; --y) {
    const auto src = img.row(y);
    for (std::size_t i = 0; i < row_len; ++i) buf[i] = static_cast<float>(src[i]);
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(row_len * sizeof(float)));
  }
}

void write_pfm(const std::filesystem::path& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_pfm(out, img);
  if (!out) throw IoError("failed writing " + path.string());
}

Image read_png_rgb(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str()))
    throw FormatError("PNG: " + path.string() + ": " + image.message);
  image.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&image);
    throw FormatError("PNG: " + path.string() + ": " + image.message);
  }
  Image img(static_cast<int>(image.width), static_cast<int>(image.height), 3);
  auto dst = img.data();
  for (std::size_t i = 0; i < buffer.size(); ++i) dst[i] = buffer[i] / 255.0;
  return img;
}

void write_png_rgb8(const std::filesystem::path& path, const Image& img) {
  if (img.channels() != 3) throw FormatError("PNG: RGB writer needs 3 channels");
  std::vector<png_byte> buffer(img.data().size());
  for (std::size_t i = 0; i < buffer.size(); ++i)
    buffer[i] = static_cast<png_byte>(std::lround(std::clamp(img.data()[i], 0.0, 1.0) * 255.0));
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, buffer.data(), 0, nullptr))
    throw IoError("PNG: cannot write " + path.string() + ": " + image.message);
}

void write_png_gray16(const std::filesystem::path& path, const Image& img, double lo, double hi) {
  if (img.channels() != 1) throw FormatError("PNG: gray writer needs 1 channel");
  const double span = hi > lo ? hi - lo : 1.0;
  std::vector<png_uint_16> buffer(img.pixel_count());
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    const double v = img.data()[i];
    buffer[i] = std::isfinite(v)
                    ? static_cast<png_uint_16>(std::lround(std::clamp((v - lo) / span, 0.0, 1.0) * 65535.0))
                    : 0;
  }
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_LINEAR_Y;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, buffer.data(), 0, nullptr))
    throw IoError("PNG: cannot write " + path.string() + ": " + image.message);
}

}  // namespace lfdepth
