#include "conedet/vision/colour.hpp"

#include <algorithm>
#include <cmath>

namespace conedet::vision {

namespace {

// D65 reference white.
constexpr double kXn = 0.95047;
constexpr double kYn = 1.0;
constexpr double kZn = 1.08883;
constexpr double kDelta = 6.0 / 29.0;

double srgb_to_linear(double c) { return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4); }
double linear_to_srgb(double c) { return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055; }

double lab_f(double t) {
  return t > kDelta * kDelta * kDelta ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}
double lab_f_inv(double t) { return t > kDelta ? t * t * t : 3.0 * kDelta * kDelta * (t - 4.0 / 29.0); }

}  // namespace

Lab srgb_to_lab(Rgb c) {
  const double r = srgb_to_linear(c[0] / 255.0);
  const double g = srgb_to_linear(c[1] / 255.0);
  const double b = srgb_to_linear(c[2] / 255.0);
  const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
  const double fx = lab_f(x / kXn);
  const double fy = lab_f(y / kYn);
  const double fz = lab_f(z / kZn);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

Rgb lab_to_srgb(const Lab& lab) {
  const double fy = (lab.L + 16.0) / 116.0;
  const double fx = fy + lab.a / 500.0;
  const double fz = fy - lab.b / 200.0;
  const double x = kXn * lab_f_inv(fx);
  const double y = kYn * lab_f_inv(fy);
  const double z = kZn * lab_f_inv(fz);
  const double lin[3] = {3.2404542 * x - 1.5371385 * y - 0.4985314 * z, -0.9692660 * x + 1.8760108 * y + 0.0415560 * z,
                         0.0556434 * x - 0.2040259 * y + 1.0572252 * z};
  Rgb out{};
  for (int i = 0; i < 3; ++i) {
    const double s = linear_to_srgb(std::clamp(lin[i], 0.0, 1.0));
    out[i] = static_cast<std::uint8_t>(std::clamp(std::lround(s * 255.0), 0L, 255L));
  }
  return out;
}

LabImage rgb_to_lab(const RgbImage& image) {
  LabImage lab{image.width, image.height, std::vector<double>(3u * image.width * image.height)};
  for (int v = 0; v < image.height; ++v) {
    for (int u = 0; u < image.width; ++u) {
      const Lab l = srgb_to_lab(image.at(u, v));
      const auto i = 3 * (static_cast<std::size_t>(v) * image.width + u);
      lab.data[i] = l.L;
      lab.data[i + 1] = l.a;
      lab.data[i + 2] = l.b;
    }
  }
  return lab;
}

Hsv rgb_to_hsv(Rgb c) {
  const double r = c[0] / 255.0, g = c[1] / 255.0, b = c[2] / 255.0;
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double d = mx - mn;
  double h = 0.0;
  if (d > 0.0) {
    if (mx == r) h = 60.0 * std::fmod((g - b) / d, 6.0);
    else if (mx == g) h = 60.0 * ((b - r) / d + 2.0);
    else h = 60.0 * ((r - g) / d + 4.0);
    if (h < 0.0) h += 360.0;
  }
  return {h, mx > 0.0 ? d / mx : 0.0, mx};
}

double colour_score(const RgbImage& image, const ColourParams& p) {
  const std::size_t n = static_cast<std::size_t>(image.width) * image.height;
  if (n == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Hsv hsv = rgb_to_hsv({image.pixels[3 * i], image.pixels[3 * i + 1], image.pixels[3 * i + 2]});
    if (hsv.h >= p.hue_lo && hsv.h <= p.hue_hi && hsv.s >= p.sat_min && hsv.v >= p.val_min) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

}  // namespace conedet::vision
