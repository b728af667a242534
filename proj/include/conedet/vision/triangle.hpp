#pragma once

#include <vector>

#include "conedet/image.hpp"

namespace conedet::vision {

struct TriangleParams {
  double canny_low = 25.0;
  double canny_high = 60.0;
  double theta_step_deg = 2.0;
  int min_votes = 8;
  int max_lines = 8;
  double apex_lo_deg = 30.0;
  double apex_hi_deg = 80.0;
};

/// Hough line u*cos(theta) + v*sin(theta) = rho in pixel-centre coordinates.
struct HoughLine {
  double theta = 0.0;  // radians [0, pi)
  double rho = 0.0;
  int votes = 0;
};

struct LinePair {
  HoughLine first;
  HoughLine second;
  double angle_deg = 0.0;  // enclosed angle in [0, 90]
  double apex_u = 0.0;
  double apex_v = 0.0;
};

struct TriangleResult {
  bool match = false;
  std::vector<HoughLine> lines;
  std::vector<LinePair> pairs;  // pairs satisfying the apex test
};

/// Binary edge map (1 = edge) from a Canny detector on the luma channel.
std::vector<std::uint8_t> canny_edges(const RgbImage& image, double low, double high);

/// Grayscale -> Canny -> Hough lines; matches when two lines leaning in
/// opposite directions enclose an angle inside the apex band and meet in the
/// upper half of the image.
TriangleResult triangle_score(const RgbImage& image, const TriangleParams& p = {});

}  // namespace conedet::vision
