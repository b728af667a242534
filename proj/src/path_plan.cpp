#include "conedet/path_plan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace conedet::planning {

namespace {

Vec2 unit(Vec2 v) {
  const double n = norm(v);
  return n > 0.0 ? (1.0 / n) * v : Vec2{1.0, 0.0};
}

Vec2 left_normal(Vec2 u) { return {-u.y, u.x}; }

int sample_count(double bound, double spacing) { return std::max(1, static_cast<int>(std::ceil(bound / spacing))); }

struct Segment {
  std::vector<Vec2> points;
  Vec2 axis;
};

void append_filler(std::vector<Vec2>& path, Vec2 next, std::span<const OrderedCone> cones, const PlannerConfig& cfg) {
  const Vec2 prev = path.back();
  const Vec2 mid = 0.5 * (prev + next);
  const OrderedCone* nearest = nullptr;
  for (const auto& c : cones)
    if (!nearest || distance(c.position, mid) < distance(nearest->position, mid)) nearest = &c;
  const Vec2 c = nearest->position;
  const double a0 = std::atan2(prev.y - c.y, prev.x - c.x);
  const double delta = normalize_angle(std::atan2(next.y - c.y, next.x - c.x) - a0);
  const int m = sample_count(std::abs(delta) * cfg.filler_offset, cfg.spacing);
  for (int k = 1; k < m; ++k) {
    const double a = a0 + delta * k / m;
    path.push_back({c.x + cfg.filler_offset * std::cos(a), c.y + cfg.filler_offset * std::sin(a)});
  }
}

void join(std::vector<Vec2>& path, const Segment& prev_seg, const Segment& next, std::span<const OrderedCone> cones,
          const PlannerConfig& cfg) {
  const Vec2 end = path.back();
  std::size_t first = 0;
  while (first < next.points.size() && dot(next.points[first] - end, prev_seg.axis) <= 0.0) ++first;
  if (first == next.points.size()) return;
  if (distance(end, next.points[first]) > 2.0 * cfg.spacing) append_filler(path, next.points[first], cones, cfg);
  path.insert(path.end(), next.points.begin() + static_cast<std::ptrdiff_t>(first), next.points.end());
}

// Linear infill wherever two neighbours are further apart than the spacing,
// and removal of coincident neighbours.
std::vector<Vec2> densify(const std::vector<Vec2>& in, double spacing) {
  std::vector<Vec2> out;
  out.reserve(in.size());
  for (const Vec2& p : in) {
    if (out.empty()) {
      out.push_back(p);
      continue;
    }
    const Vec2 q = out.back();
    const double d = distance(p, q);
    if (d < 1e-9) continue;
    const int n = sample_count(d, spacing);
    for (int k = 1; k < n; ++k) out.push_back(q + (static_cast<double>(k) / n) * (p - q));
    out.push_back(p);
  }
  return out;
}

}  // namespace

void PlannerConfig::validate() const {
  if (!(amplitude > 0.0)) throw std::invalid_argument("planner: amplitude must be positive");
  if (!(spacing > 0.0)) throw std::invalid_argument("planner: spacing must be positive");
  if (!(filler_offset > 0.0)) throw std::invalid_argument("planner: filler_offset must be positive");
  if (!(straight_length > 0.0)) throw std::invalid_argument("planner: straight_length must be positive");
  if (exit_length < 0.0) throw std::invalid_argument("planner: exit_length must be >= 0");
  if (first_side != 1 && first_side != -1) throw std::invalid_argument("planner: first_side must be +1 or -1");
}

std::vector<OrderedCone> order_and_sides(std::span<const Vec2> cones, const Pose2D& start, const PlannerConfig& cfg) {
  const Vec2 s = start.position();
  Vec2 dir{std::cos(start.theta), std::sin(start.theta)};
  std::vector<std::size_t> remaining;
  for (std::size_t i = 0; i < cones.size(); ++i)
    if (dot(cones[i] - s, dir) > 0.0) remaining.push_back(i);

  std::vector<OrderedCone> out;
  Vec2 cur = s;
  int side = cfg.first_side;
  while (!remaining.empty()) {
    auto best = remaining.end();
    double best_proj = std::numeric_limits<double>::infinity();
    for (auto it = remaining.begin(); it != remaining.end(); ++it) {
      const double proj = dot(cones[*it] - cur, dir);
      if (proj > 1e-9 && proj < best_proj) {
        best_proj = proj;
        best = it;
      }
    }
    if (best == remaining.end()) {
      best = std::min_element(remaining.begin(), remaining.end(), [&](std::size_t a, std::size_t b) {
        return distance(cones[a], cur) < distance(cones[b], cur);
      });
    }
    const std::size_t idx = *best;
    remaining.erase(best);
    out.push_back({idx, cones[idx], side});
    side = -side;
    if (distance(cones[idx], cur) > 0.0) dir = unit(cones[idx] - cur);
    cur = cones[idx];
  }
  return out;
}

PlannedPath plan(std::span<const Vec2> cones, const Pose2D& start, const PlannerConfig& cfg, int version) {
  cfg.validate();
  PlannedPath result;
  result.version = version;
  const Vec2 s = start.position();
  const Vec2 heading{std::cos(start.theta), std::sin(start.theta)};
  const auto ordered = order_and_sides(cones, start, cfg);

  if (ordered.empty()) {
    const int n = sample_count(cfg.straight_length, cfg.spacing);
    for (int j = 0; j <= n; ++j) result.points.push_back(s + (cfg.straight_length * j / n) * heading);
    return result;
  }

  const double a = cfg.amplitude;
  std::vector<Segment> segments;

  // Ramp: zero offset at the start, side * A abreast of the first cone.
  {
    const Vec2 d = ordered.front().position - s;
    const double len = norm(d);
    const Vec2 u = unit(d);
    const Vec2 n = left_normal(u);
    const int count = sample_count(std::hypot(len, a * kPi / 2.0), cfg.spacing);
    Segment seg{{}, u};
    for (int j = 0; j <= count; ++j) {
      const double t = static_cast<double>(j) / count;
      seg.points.push_back(s + t * d + (ordered.front().side * a * std::sin(kPi * t / 2.0)) * n);
    }
    segments.push_back(std::move(seg));
  }

  for (std::size_t i = 0; i + 1 < ordered.size(); ++i) {
    const Vec2 c0 = ordered[i].position;
    const Vec2 d = ordered[i + 1].position - c0;
    const Vec2 u = unit(d);
    const Vec2 n = left_normal(u);
    const int count = sample_count(std::hypot(norm(d), a * kPi), cfg.spacing);
    Segment seg{{}, u};
    for (int j = 0; j <= count; ++j) {
      const double t = static_cast<double>(j) / count;
      seg.points.push_back(c0 + t * d + (ordered[i].side * a * std::cos(kPi * t)) * n);
    }
    segments.push_back(std::move(seg));
  }

  if (cfg.exit_length > 0.0) {
    const Segment& last = segments.back();
    const Vec2 from = last.points.back();
    const int count = sample_count(cfg.exit_length, cfg.spacing);
    Segment seg{{}, last.axis};
    for (int j = 0; j <= count; ++j) seg.points.push_back(from + (cfg.exit_length * j / count) * last.axis);
    segments.push_back(std::move(seg));
  }

  std::vector<Vec2> path = segments.front().points;
  for (std::size_t i = 1; i < segments.size(); ++i) join(path, segments[i - 1], segments[i], ordered, cfg);
  result.points = densify(path, cfg.spacing);
  return result;
}

nlohmann::json to_json(const PlannedPath& path) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : path.points) pts.push_back({p.x, p.y});
  return {{"version", path.version}, {"points", pts}};
}

PlannerConfig planner_config_from_json(const nlohmann::json& j, PlannerConfig c) {
  c.amplitude = j.value("amplitude", c.amplitude);
  c.spacing = j.value("spacing", c.spacing);
  c.filler_offset = j.value("filler_offset", c.amplitude);
  c.straight_length = j.value("straight_length", c.straight_length);
  c.exit_length = j.value("exit_length", c.exit_length);
  if (j.contains("first_side")) {
    const auto& fs = j["first_side"];
    if (fs.is_string()) {
      const auto v = fs.get<std::string>();
      if (v == "left") c.first_side = 1;
      else if (v == "right") c.first_side = -1;
      else throw std::invalid_argument("planner: first_side must be left or right");
    } else {
      c.first_side = fs.get<int>();
    }
  }
  c.validate();
  return c;
}

}  // namespace conedet::planning
