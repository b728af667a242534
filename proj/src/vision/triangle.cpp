#include "conedet/vision/triangle.hpp"

#include <algorithm>
#include <cmath>

#include "conedet/geometry.hpp"

namespace conedet::vision {

namespace {

std::vector<double> luma(const RgbImage& img) {
  std::vector<double> g(static_cast<std::size_t>(img.width) * img.height);
  for (std::size_t i = 0; i < g.size(); ++i)
    g[i] = 0.299 * img.pixels[3 * i] + 0.587 * img.pixels[3 * i + 1] + 0.114 * img.pixels[3 * i + 2];
  return g;
}

// 5-tap binomial blur, separable, clamped borders.
std::vector<double> blur(const std::vector<double>& src, int w, int h) {
  static constexpr double k[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
  std::vector<double> tmp(src.size()), out(src.size());
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      double s = 0.0;
      for (int i = -2; i <= 2; ++i) s += k[i + 2] * src[v * w + std::clamp(u + i, 0, w - 1)];
      tmp[v * w + u] = s;
    }
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      double s = 0.0;
      for (int i = -2; i <= 2; ++i) s += k[i + 2] * tmp[std::clamp(v + i, 0, h - 1) * w + u];
      out[v * w + u] = s;
    }
  return out;
}

}  // namespace

std::vector<std::uint8_t> canny_edges(const RgbImage& image, double low, double high) {
  const int w = image.width, h = image.height;
  std::vector<std::uint8_t> edges(static_cast<std::size_t>(w) * h, 0);
  if (w < 3 || h < 3) return edges;
  const auto g = blur(luma(image), w, h);

  std::vector<double> mag(g.size(), 0.0);
  std::vector<std::uint8_t> dir(g.size(), 0);
  for (int v = 1; v < h - 1; ++v) {
    for (int u = 1; u < w - 1; ++u) {
      auto at = [&](int du, int dv) { return g[(v + dv) * w + (u + du)]; };
      const double gx = (at(1, -1) + 2 * at(1, 0) + at(1, 1)) - (at(-1, -1) + 2 * at(-1, 0) + at(-1, 1));
      const double gy = (at(-1, 1) + 2 * at(0, 1) + at(1, 1)) - (at(-1, -1) + 2 * at(0, -1) + at(1, -1));
      mag[v * w + u] = std::hypot(gx, gy);
      double ang = std::atan2(gy, gx) * 180.0 / kPi;
      if (ang < 0) ang += 180.0;
      dir[v * w + u] = ang < 22.5 || ang >= 157.5 ? 0 : ang < 67.5 ? 1 : ang < 112.5 ? 2 : 3;
    }
  }

  // Non-maximum suppression along the gradient direction.
  std::vector<double> thin(g.size(), 0.0);
  static constexpr int off[4][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}};
  for (int v = 1; v < h - 1; ++v) {
    for (int u = 1; u < w - 1; ++u) {
      const int i = v * w + u;
      const auto [du, dv] = off[dir[i]];
      const double m = mag[i];
      if (m >= mag[(v + dv) * w + (u + du)] && m >= mag[(v - dv) * w + (u - du)]) thin[i] = m;
    }
  }

  // Hysteresis: grow strong edges through weak ones.
  std::vector<int> stack;
  for (int i = 0; i < w * h; ++i) {
    if (thin[i] >= high) {
      edges[i] = 1;
      stack.push_back(i);
    }
  }
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    const int u = i % w, v = i / w;
    for (int dv = -1; dv <= 1; ++dv)
      for (int du = -1; du <= 1; ++du) {
        const int uu = u + du, vv = v + dv;
        if (uu < 0 || vv < 0 || uu >= w || vv >= h) continue;
        const int j = vv * w + uu;
        if (!edges[j] && thin[j] >= low) {
          edges[j] = 1;
          stack.push_back(j);
        }
      }
  }
  return edges;
}

TriangleResult triangle_score(const RgbImage& image, const TriangleParams& p) {
  TriangleResult result;
  const int w = image.width, h = image.height;
  const auto edges = canny_edges(image, p.canny_low, p.canny_high);

  const int n_theta = static_cast<int>(std::lround(180.0 / p.theta_step_deg));
  const double diag = std::hypot(w, h);
  const int n_rho = 2 * static_cast<int>(std::ceil(diag)) + 1;
  const int rho_off = n_rho / 2;
  std::vector<double> cs(n_theta), sn(n_theta);
  for (int t = 0; t < n_theta; ++t) {
    const double th = deg2rad(t * p.theta_step_deg);
    cs[t] = std::cos(th);
    sn[t] = std::sin(th);
  }
  std::vector<int> acc(static_cast<std::size_t>(n_theta) * n_rho, 0);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      if (!edges[v * w + u]) continue;
      for (int t = 0; t < n_theta; ++t) {
        const int r = static_cast<int>(std::lround((u + 0.5) * cs[t] + (v + 0.5) * sn[t])) + rho_off;
        ++acc[t * n_rho + r];
      }
    }

  // Local maxima above the vote floor, strongest first.
  for (int t = 0; t < n_theta; ++t)
    for (int r = 0; r < n_rho; ++r) {
      const int votes = acc[t * n_rho + r];
      if (votes < p.min_votes) continue;
      bool peak = true;
      for (int dt = -1; dt <= 1 && peak; ++dt)
        for (int dr = -1; dr <= 1 && peak; ++dr) {
          if (dt == 0 && dr == 0) continue;
          const int tt = (t + dt + n_theta) % n_theta;
          const int rr = r + dr;
          if (rr < 0 || rr >= n_rho) continue;
          const int other = acc[tt * n_rho + rr];
          // Strict on one side so plateaus yield a single peak.
          if (other > votes || (other == votes && (dt < 0 || (dt == 0 && dr < 0)))) peak = false;
        }
      if (peak) result.lines.push_back({deg2rad(t * p.theta_step_deg), static_cast<double>(r - rho_off), votes});
    }
  std::stable_sort(result.lines.begin(), result.lines.end(), [](const HoughLine& a, const HoughLine& b) { return a.votes > b.votes; });
  if (static_cast<int>(result.lines.size()) > p.max_lines) result.lines.resize(p.max_lines);

  for (std::size_t i = 0; i < result.lines.size(); ++i) {
    for (std::size_t j = i + 1; j < result.lines.size(); ++j) {
      const HoughLine& a = result.lines[i];
      const HoughLine& b = result.lines[j];
      // Lean direction du/dv = -tan(theta); a cone's flanks lean opposite ways.
      // Near-horizontal lines (theta ~ 90 deg) are bases or stripes, not flanks.
      if (std::abs(rad2deg(a.theta) - 90.0) < 10.0 || std::abs(rad2deg(b.theta) - 90.0) < 10.0) continue;
      if (!(std::tan(a.theta) * std::tan(b.theta) < 0.0)) continue;
      double d = std::abs(rad2deg(a.theta - b.theta));
      d = std::min(d, 180.0 - d);
      if (d < p.apex_lo_deg || d > p.apex_hi_deg) continue;
      const double det = std::cos(a.theta) * std::sin(b.theta) - std::sin(a.theta) * std::cos(b.theta);
      if (std::abs(det) < 1e-9) continue;
      const double au = (a.rho * std::sin(b.theta) - b.rho * std::sin(a.theta)) / det;
      const double av = (std::cos(a.theta) * b.rho - std::cos(b.theta) * a.rho) / det;
      if (au < 0.0 || au >= w || av < 0.0 || av >= 0.5 * h) continue;
      result.pairs.push_back({a, b, d, au, av});
    }
  }
  result.match = !result.pairs.empty();
  return result;
}

}  // namespace conedet::vision
