#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "conedet/geometry.hpp"

namespace conedet {

using Rgb = std::array<std::uint8_t, 3>;

/// Row-major 8-bit sRGB raster.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // 3 * width * height

  RgbImage() = default;
  RgbImage(int w, int h, Rgb fill = {0, 0, 0});

  Rgb at(int u, int v) const {
    const auto i = 3 * (static_cast<std::size_t>(v) * width + u);
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
  }
  void set(int u, int v, Rgb c) {
    const auto i = 3 * (static_cast<std::size_t>(v) * width + u);
    pixels[i] = c[0];
    pixels[i + 1] = c[1];
    pixels[i + 2] = c[2];
  }
  bool valid() const { return width > 0 && height > 0 && pixels.size() == 3u * width * height; }
};

using SyntheticImage = RgbImage;

/// Binary PPM (P6, maxval 255).
void write_ppm(const std::filesystem::path& path, const RgbImage& image);
RgbImage read_ppm(const std::filesystem::path& path);

/// Cuts `box` out of `image` (pixel grid snapped outward) and resamples it
/// bilinearly to `out_w` x `out_h`.
RgbImage crop_and_resize(const RgbImage& image, const PixelBox& box, int out_w, int out_h);

}  // namespace conedet
