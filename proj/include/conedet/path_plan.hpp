#pragma once

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "conedet/geometry.hpp"

namespace conedet::planning {

struct PlannerConfig {
  double amplitude = 1.5;        // lateral offset abreast of each cone
  double spacing = 0.25;         // target distance between path points
  double filler_offset = 1.5;    // radius of filler arcs around a cone
  double straight_length = 10.0; // path length with no cones known
  double exit_length = 6.0;      // straight run-out past the last cone
  int first_side = +1;           // +1 passes the first cone on its left (seen along the running direction)

  void validate() const;
};

struct OrderedCone {
  std::size_t index = 0;  // into the input list
  Vec2 position;
  int side = +1;
};

/// Walks from the start along the running direction, each time taking the
/// cone with the smallest positive projection ahead of the current one.
/// Cones behind the start pose are dropped. Sides alternate from first_side.
std::vector<OrderedCone> order_and_sides(std::span<const Vec2> cones, const Pose2D& start, const PlannerConfig& cfg);

struct PlannedPath {
  std::vector<Vec2> points;
  int version = 0;
};

/// Full rebuild from the cone list: sine ramp from the start to the first
/// cone, half-cosine segments between cones, filler arcs across gaps,
/// overlap trimming, and a straight run-out.
PlannedPath plan(std::span<const Vec2> cones, const Pose2D& start, const PlannerConfig& cfg, int version = 0);

/// {version, points: [[x, y], ...]}
nlohmann::json to_json(const PlannedPath& path);

PlannerConfig planner_config_from_json(const nlohmann::json& j, PlannerConfig defaults = {});

}  // namespace conedet::planning
