#include "conedet/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace conedet {

RgbImage::RgbImage(int w, int h, Rgb fill) : width(w), height(h), pixels(3u * w * h) {
  for (std::size_t i = 0; i < pixels.size(); i += 3) {
    pixels[i] = fill[0];
    pixels[i + 1] = fill[1];
    pixels[i + 2] = fill[2];
  }
}

void write_ppm(const std::filesystem::path& path, const RgbImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
}

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  char c = 0;
  while (in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      tok.push_back(c);
      break;
    }
  }
  while (in.get(c) && !std::isspace(static_cast<unsigned char>(c))) tok.push_back(c);
  return tok;
}

}  // namespace

RgbImage read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  if (next_token(in) != "P6") throw std::runtime_error(path.string() + ": not a binary PPM");
  const int w = std::stoi(next_token(in));
  const int h = std::stoi(next_token(in));
  const int maxval = std::stoi(next_token(in));
  if (w <= 0 || h <= 0 || maxval != 255) throw std::runtime_error(path.string() + ": unsupported PPM header");
  RgbImage img(w, h);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
    throw std::runtime_error(path.string() + ": truncated pixel data");
  return img;
}

RgbImage crop_and_resize(const RgbImage& image, const PixelBox& box, int out_w, int out_h) {
  const int u0 = std::clamp(static_cast<int>(std::floor(box.u0)), 0, image.width - 1);
  const int v0 = std::clamp(static_cast<int>(std::floor(box.v0)), 0, image.height - 1);
  const int u1 = std::clamp(static_cast<int>(std::ceil(box.u1)), u0 + 1, image.width);
  const int v1 = std::clamp(static_cast<int>(std::ceil(box.v1)), v0 + 1, image.height);
  const int cw = u1 - u0;
  const int ch = v1 - v0;

  RgbImage out(out_w, out_h);
  const double sx = static_cast<double>(cw) / out_w;
  const double sy = static_cast<double>(ch) / out_h;
  for (int y = 0; y < out_h; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, ch - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, ch - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, cw - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, cw - 1);
      const double wx = fx - x0;
      const Rgb a = image.at(u0 + x0, v0 + y0);
      const Rgb b = image.at(u0 + x1, v0 + y0);
      const Rgb c = image.at(u0 + x0, v0 + y1);
      const Rgb d = image.at(u0 + x1, v0 + y1);
      Rgb px{};
      for (int i = 0; i < 3; ++i) {
        const double top = a[i] + wx * (b[i] - a[i]);
        const double bot = c[i] + wx * (d[i] - c[i]);
        px[i] = static_cast<std::uint8_t>(std::lround(top + wy * (bot - top)));
      }
      out.set(x, y, px);
    }
  }
  return out;
}

}  // namespace conedet
