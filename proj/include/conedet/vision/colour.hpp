#pragma once

#include <vector>

#include "conedet/image.hpp"

namespace conedet::vision {

/// CIE L*a*b* raster (D65). Channels are interleaved L, a, b per pixel.
struct LabImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // 3 * width * height

  double L(int u, int v) const { return data[3 * (static_cast<std::size_t>(v) * width + u)]; }
  double a(int u, int v) const { return data[3 * (static_cast<std::size_t>(v) * width + u) + 1]; }
  double b(int u, int v) const { return data[3 * (static_cast<std::size_t>(v) * width + u) + 2]; }
};

struct Lab {
  double L, a, b;
};

Lab srgb_to_lab(Rgb c);
/// Inverse of srgb_to_lab, rounded and clamped to 8 bits.
Rgb lab_to_srgb(const Lab& lab);

LabImage rgb_to_lab(const RgbImage& image);

struct Hsv {
  double h;  // degrees [0, 360)
  double s;  // [0, 1]
  double v;  // [0, 1]
};

Hsv rgb_to_hsv(Rgb c);

/// Orange-band gate used by the colour baseline.
struct ColourParams {
  double hue_lo = 10.0;
  double hue_hi = 35.0;
  double sat_min = 0.5;
  double val_min = 0.4;
  double threshold = 0.15;
};

/// Fraction of pixels inside the orange HSV band.
double colour_score(const RgbImage& image, const ColourParams& p = {});
inline bool colour_match(const RgbImage& image, const ColourParams& p = {}) { return colour_score(image, p) >= p.threshold; }

}  // namespace conedet::vision
