#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <filesystem>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "conedet/cone_map.hpp"
#include "conedet/drive.hpp"
#include "conedet/lidar_detect.hpp"
#include "conedet/path_plan.hpp"
#include "conedet/sim_world.hpp"
#include "conedet/vision/crop.hpp"
#include "conedet/vision/evaluate.hpp"

namespace conedet::mission {

enum class MissionMode { manual, autonomous };
enum class PoseSource { ground_truth, dead_reckoning };

std::string to_string(MissionMode m);
MissionMode mission_mode_from_string(const std::string& s);

struct ClassifierSettings {
  std::string kind = "cnn";  // cnn | prefiltered | colour
  std::filesystem::path weights;
  double threshold = 0.5;
  vision::CropParams crop;
  vision::PrefilterParams prefilter;
};

struct MissionSettings {
  double dt = 0.1;
  double timeout = 120.0;
  PoseSource pose_source = PoseSource::ground_truth;
  double encoder_noise = 0.0;  // relative stddev on measured speed and steering
  MissionMode mode = MissionMode::autonomous;
  double dedup_radius = 1.0;
  std::size_t driven_tail = 400;
  double match_radius = 0.5;  // mapped cone counts as true within this distance
};

/// Everything a run needs, read from one scenario file.
struct MissionConfig {
  sim::Scenario scenario;
  lidar::DetectionConstraints detector;
  ClassifierSettings classifier;
  planning::PlannerConfig planner;
  drive::PursuitConfig pursuit;
  MissionSettings mission;
};

/// Relative weight paths resolve against `base_dir`. Throws on invalid input.
MissionConfig mission_config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
MissionConfig load_mission_config(const std::filesystem::path& file);

/// Builds the configured classifier. A cnn or prefiltered kind needs loaded
/// weights; colour does not.
vision::Scorer make_classifier(const ClassifierSettings& s, std::shared_ptr<const vision::CnnClassifier> cnn);

struct CandidateReport {
  Point3 local;
  int point_count = 0;
  bool classified = false;  // false when the candidate does not project into the frame
  double score = 0.0;
  bool accepted = false;
};

struct TelemetryFrame {
  double t = 0.0;
  MissionMode mode = MissionMode::manual;
  Pose2D estimated;  // map frame
  Pose2D truth;      // map frame
  nlohmann::json cones;
  planning::PlannedPath path;
  std::vector<Vec2> driven_tail;
  std::vector<CandidateReport> candidates;
  double steer = 0.0;
  double speed = 0.0;
  bool goal_reached = false;
  std::string status = "ok";
};

nlohmann::json to_json(const TelemetryFrame& f);

/// Operator command. Coordinates are in the map frame.
struct Command {
  std::string name;
  MissionMode mode = MissionMode::manual;
  double steer = 0.0;
  double speed = 0.0;
  double x = 0.0;
  double y = 0.0;
};

/// Parses {"type": "command", "name": ...}; throws std::invalid_argument on
/// an unknown name or malformed fields.
Command parse_command(const nlohmann::json& msg, double max_steer);

struct RunStats {
  std::uint64_t ticks = 0;
  std::uint64_t candidates = 0;
  std::uint64_t classified = 0;
  std::uint64_t classifier_invocations = 0;
  std::uint64_t pursue_invocations = 0;
  vision::ConfusionCounts confusion;  // candidate-level, against ground truth
  double classify_ms = 0.0;
  std::vector<double> detection_ranges;  // vehicle-to-cone distance when each cone entered the map
  double min_clearance = 1e300;          // vehicle reference point to any true cone
};

/// Single-threaded tick loop owning the world, the map, the path and the
/// vehicle. Only submit() may be called from other threads.
class Mission {
 public:
  Mission(MissionConfig config, vision::Scorer classifier);

  TelemetryFrame tick();

  /// Validates and queues a command for the next tick. Returns an ack or an
  /// error message; thread-safe.
  nlohmann::json submit(const nlohmann::json& msg);
  /// Applies a command immediately (tick thread only).
  void apply(const Command& cmd);

  double time() const { return t_; }
  MissionMode mode() const { return mode_; }
  bool goal_reached() const { return goal_reached_; }
  const mapping::ConeMap& map() const { return map_; }
  const planning::PlannedPath& path() const { return path_; }
  /// Poses in the map frame (origin at the start pose).
  Pose2D truth_pose() const;
  Pose2D estimated_pose() const { return estimate_.pose; }
  const RunStats& stats() const { return stats_; }
  const MissionConfig& config() const { return config_; }
  const sim::Scenario& scenario() const { return config_.scenario; }
  /// True cone positions in the map frame.
  std::vector<Vec2> true_cones() const;

  /// {t, x, y, theta, steer, v} of the estimated pose after the last tick.
  static std::string run_log_line(const TelemetryFrame& f);

  nlohmann::json metrics() const;

 private:
  void replan();

  MissionConfig config_;
  vision::Scorer classifier_;
  sim::Plant plant_;
  std::mt19937_64 encoder_rng_;
  VehicleState truth_;  // world frame
  VehicleState estimate_;  // map frame
  mapping::ConeMap map_;
  planning::PlannedPath path_;
  MissionMode mode_;
  double t_ = 0.0;
  bool goal_reached_ = false;
  bool dirty_ = false;
  double manual_steer_ = 0.0;
  double manual_speed_ = 0.0;
  std::deque<Vec2> driven_;
  std::string status_ = "ok";
  RunStats stats_;

  std::mutex inbox_mutex_;
  std::deque<Command> inbox_;
};

/// Sliding-window classifier count for one frame: windows of `window` px
/// moved by `stride` px in both directions.
std::uint64_t sliding_window_count(int width, int height, int window = 32, int stride = 32);

struct RunOptions {
  std::filesystem::path scenario;
  bool headless = true;
  std::optional<std::uint64_t> seed;
  std::optional<MissionMode> mode;
  std::filesystem::path metrics_out;
  std::filesystem::path log_out;
  std::optional<unsigned short> serve_port;
};

/// CLI entry: 0 on completion, 2 on an invalid scenario, 3 on timeout.
int run_scenario(const RunOptions& opt);

}  // namespace conedet::mission
