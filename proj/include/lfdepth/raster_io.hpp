#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "lfdepth/image.hpp"

namespace lfdepth {

// PFM: "Pf" (1 channel) or "PF" (3 channels), "W H", scale (negative means
// little-endian), then float32 rows stored bottom-to-top. Images are held
// top-to-bottom in memory.
Image read_pfm(const std::filesystem::path& path);
Image read_pfm(std::istream& in);
void write_pfm(const std::filesystem::path& path, const Image& img);
void write_pfm(std::ostream& out, const Image& img);

// 8- or 16-bit PNG of any color type, returned as 3-channel RGB in [0,1].
Image read_png_rgb(const std::filesystem::path& path);
// 3-channel image in [0,1] written as 8-bit RGB.
void write_png_rgb8(const std::filesystem::path& path, const Image& img);
// 1-channel image mapped linearly from [lo, hi] to [0, 65535]; NaN -> 0.
void write_png_gray16(const std::filesystem::path& path, const Image& img, double lo, double hi);

}  // namespace lfdepth
