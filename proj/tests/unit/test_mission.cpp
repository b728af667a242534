#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <unistd.h>

#include "conedet/mission.hpp"

using namespace conedet;
using namespace conedet::mission;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = CONEDET_SOURCE_DIR;

MissionConfig reference() { return load_mission_config(kSource / "scenarios" / "reference_slalom.json"); }

std::shared_ptr<const vision::CnnClassifier> trained() {
  static auto cnn = std::make_shared<const vision::CnnClassifier>(vision::load_weights(kSource / "models" / "cone_cnn.json"));
  return cnn;
}

Mission make_mission(MissionConfig cfg) {
  auto scorer = make_classifier(cfg.classifier, trained());
  return Mission(std::move(cfg), std::move(scorer));
}

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("conedet_mission_" + std::to_string(::getpid()) + "_" + name);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Mission, NoConesDrivesStraightAndStops) {
  MissionConfig cfg = reference();
  cfg.scenario.objects.clear();
  Mission m = make_mission(cfg);
  while (!m.goal_reached() && m.time() < 30.0) m.tick();
  ASSERT_TRUE(m.goal_reached());
  const Pose2D stop = m.truth_pose();
  EXPECT_LE(distance(stop.position(), {cfg.planner.straight_length, 0.0}), cfg.pursuit.goal_radius + 1e-9);
  EXPECT_NEAR(stop.y, 0.0, 1e-9);
  EXPECT_EQ(m.mode(), MissionMode::manual);
  for (int i = 0; i < 10; ++i) m.tick();
  EXPECT_EQ(m.truth_pose().x, stop.x);
  EXPECT_EQ(m.map().size(), 0u);
}

TEST(Mission, SingleConeMappedQuickly) {
  MissionConfig cfg = reference();
  cfg.scenario.objects = {sim::make_cone({12.0, 0.5})};
  Mission m = make_mission(cfg);
  while (m.time() < 5.0 - 1e-9 && m.map().size() == 0) m.tick();
  ASSERT_EQ(m.map().size(), 1u);
  EXPECT_LE(m.time(), 5.0 + 1e-9);
  EXPECT_LT(distance(m.map().cones()[0].position, {12.0, 0.5}), 0.3);
}

TEST(Mission, ReflectorAloneStaysOutOfMap) {
  MissionConfig cfg = reference();
  cfg.scenario.objects = {sim::make_reflector({9.0, 0.8}), sim::make_reflector({14.0, -0.8})};
  cfg.planner.straight_length = 20.0;
  Mission m = make_mission(cfg);
  while (!m.goal_reached() && m.time() < 20.0) m.tick();
  EXPECT_GT(m.stats().classified, 0u);
  EXPECT_EQ(m.map().size(), 0u);
  EXPECT_EQ(m.path().version, 0);
}

TEST(Mission, StartPoseDefinesMapFrame) {
  MissionConfig cfg = reference();
  cfg.scenario.vehicle.start = Pose2D::make(5.0, -3.0, kPi / 2);
  cfg.scenario.objects = {sim::make_cone(local_to_global(cfg.scenario.vehicle.start, {12.0, 0.0}))};
  Mission m = make_mission(cfg);
  while (m.time() < 5.0 && m.map().size() == 0) m.tick();
  ASSERT_EQ(m.map().size(), 1u);
  EXPECT_LT(distance(m.map().cones()[0].position, {12.0, 0.0}), 0.3);
  EXPECT_LT(distance(m.true_cones()[0], {12.0, 0.0}), 1e-9);
}

TEST(Mission, SetModeShowsInNextFrame) {
  MissionConfig cfg = reference();
  cfg.mission.mode = MissionMode::manual;
  Mission m = make_mission(cfg);
  EXPECT_EQ(m.tick().mode, MissionMode::manual);
  const auto ack = m.submit({{"type", "command"}, {"name", "set_mode"}, {"mode", "autonomous"}, {"id", 7}});
  EXPECT_EQ(ack["type"], "ack");
  EXPECT_EQ(ack["id"], 7);
  const TelemetryFrame f = m.tick();
  EXPECT_EQ(f.mode, MissionMode::autonomous);
  EXPECT_EQ(to_json(f)["mode"], "autonomous");
}

TEST(Mission, UnknownVerbIsRejected) {
  Mission m = make_mission(reference());
  m.tick();
  const Pose2D before = m.truth_pose();
  const auto reply = m.submit({{"type", "command"}, {"name", "teleport"}});
  EXPECT_EQ(reply["type"], "error");
  EXPECT_TRUE(reply.contains("message"));
  EXPECT_EQ(m.submit(nlohmann::json::array())["type"], "error");
  EXPECT_EQ(m.submit({{"type", "command"}, {"name", "set_mode"}, {"mode", "fly"}})["type"], "error");
  EXPECT_EQ(m.submit({{"type", "command"}, {"name", "manual_drive"}, {"steer", "left"}, {"speed", 1}})["type"], "error");
  EXPECT_EQ(m.truth_pose().x, before.x);
  EXPECT_EQ(m.mode(), MissionMode::autonomous);
}

TEST(Mission, PlacedConeAppearsWithinThreeSeconds) {
  MissionConfig cfg = reference();
  cfg.scenario.objects.clear();
  cfg.planner.straight_length = 30.0;
  Mission m = make_mission(cfg);
  for (int i = 0; i < 5; ++i) m.tick();
  const int version = m.path().version;
  const double placed_at = m.time();
  const Vec2 spot{m.truth_pose().x + 9.0, 0.4};
  EXPECT_EQ(m.submit({{"type", "command"}, {"name", "place_cone"}, {"x", spot.x}, {"y", spot.y}})["type"], "ack");
  while (m.map().size() == 0 && m.time() < placed_at + 3.0 - 1e-9) m.tick();
  ASSERT_EQ(m.map().size(), 1u);
  EXPECT_LT(distance(m.map().cones()[0].position, spot), 0.3);
  EXPECT_GT(m.path().version, version);
}

TEST(Mission, ResetMapClearsCones) {
  MissionConfig cfg = reference();
  cfg.scenario.objects = {sim::make_cone({10.0, 0.0})};
  Mission m = make_mission(cfg);
  while (m.map().size() == 0 && m.time() < 5.0) m.tick();
  ASSERT_EQ(m.map().size(), 1u);
  m.submit({{"type", "command"}, {"name", "reset_map"}});
  m.tick();
  // The cone is still in view, so it comes back with a fresh id.
  EXPECT_LE(m.map().size(), 1u);
  m.submit({{"type", "command"}, {"name", "set_mode"}, {"mode", "manual"}});
  m.tick();
  EXPECT_EQ(m.mode(), MissionMode::manual);
}

TEST(Mission, ManualModeNeverPursues) {
  MissionConfig cfg = reference();
  cfg.mission.mode = MissionMode::manual;
  Mission m = make_mission(cfg);
  m.submit({{"type", "command"}, {"name", "manual_drive"}, {"steer", 0.05}, {"speed", 1.5}});
  double last_t = m.time();
  for (int i = 0; i < 40; ++i) {
    const TelemetryFrame f = m.tick();
    EXPECT_GT(f.t, last_t);
    last_t = f.t;
    EXPECT_DOUBLE_EQ(f.speed, 1.5);
  }
  EXPECT_EQ(m.stats().pursue_invocations, 0u);
  EXPECT_GT(m.truth_pose().x, 5.0);
}

TEST(Mission, InvocationsEqualClassifiedCandidates) {
  Mission m = make_mission(reference());
  for (int i = 0; i < 60; ++i) {
    const TelemetryFrame f = m.tick();
    for (const auto& c : f.candidates)
      if (!c.classified) EXPECT_FALSE(c.accepted);
  }
  const auto& s = m.stats();
  EXPECT_GT(s.classified, 0u);
  EXPECT_EQ(s.classifier_invocations, s.classified);
  EXPECT_LE(s.classified, s.candidates);
  EXPECT_EQ(trained()->invocations() > 0, true);
  const auto j = m.metrics();
  EXPECT_EQ(j["classifier"]["invocations"], s.classifier_invocations);
  EXPECT_EQ(j["sliding_window"]["per_frame"], 300u);
}

TEST(Mission, TelemetryJsonShape) {
  Mission m = make_mission(reference());
  const auto j = to_json(m.tick());
  for (const char* k : {"type", "t", "mode", "pose", "cones", "planned_path", "driven_path", "candidates", "control",
                        "goal_reached", "status"})
    EXPECT_TRUE(j.contains(k)) << k;
  EXPECT_EQ(j["type"], "telemetry");
  EXPECT_TRUE(j["pose"].contains("estimated"));
  EXPECT_TRUE(j["pose"].contains("truth"));
  EXPECT_TRUE(j["planned_path"].contains("version"));
  const auto line = nlohmann::json::parse(Mission::run_log_line(m.tick()));
  for (const char* k : {"t", "x", "y", "theta", "steer", "v"}) EXPECT_TRUE(line.contains(k)) << k;
}

TEST(Mission, ParseCommand) {
  const Command c = parse_command({{"type", "command"}, {"name", "manual_drive"}, {"steer", 0.1}, {"speed", 2.0}}, 0.5);
  EXPECT_EQ(c.name, "manual_drive");
  EXPECT_DOUBLE_EQ(c.steer, 0.1);
  EXPECT_THROW(parse_command({{"type", "hello"}, {"name", "set_mode"}}, 0.5), std::invalid_argument);
  EXPECT_THROW(parse_command({{"type", "command"}, {"name", "place_cone"}, {"x", 1.0}}, 0.5), std::invalid_argument);
}

TEST(Mission, SlidingWindowCount) {
  EXPECT_EQ(sliding_window_count(640, 480), 300u);
  EXPECT_EQ(sliding_window_count(64, 64, 32, 16), 9u);
  EXPECT_EQ(sliding_window_count(16, 16), 0u);
}

TEST(Mission, ConfigRejectsBadInput) {
  EXPECT_THROW(mission_config_from_json({{"classifier", {{"kind", "svm"}}}}), std::invalid_argument);
  EXPECT_THROW(mission_config_from_json({{"mission", {{"pose_source", "gps"}}}}), std::invalid_argument);
  const auto cfg = reference();
  EXPECT_DOUBLE_EQ(cfg.detector.sensor_height, cfg.scenario.lidar.mount_height);
  EXPECT_DOUBLE_EQ(cfg.pursuit.wheelbase, cfg.scenario.vehicle.wheelbase);
  EXPECT_TRUE(fs::exists(cfg.classifier.weights));
}

TEST(RunScenario, MalformedJsonExitsTwo) {
  const fs::path bad = temp_file("bad.json");
  std::ofstream(bad) << "{ \"seed\": 1, ";
  RunOptions opt;
  opt.scenario = bad;
  EXPECT_EQ(run_scenario(opt), 2);
  opt.scenario = temp_file("missing.json");
  EXPECT_EQ(run_scenario(opt), 2);
  fs::remove(bad);
}

TEST(RunScenario, InvalidWeightsExitTwo) {
  nlohmann::json doc = nlohmann::json::parse(slurp(kSource / "scenarios" / "reference_slalom.json"));
  doc["classifier"]["weights"] = (kSource / "models" / "no_such_weights.json").string();
  const fs::path file = temp_file("noweights.json");
  std::ofstream(file) << doc.dump();
  RunOptions opt;
  opt.scenario = file;
  EXPECT_EQ(run_scenario(opt), 2);
  fs::remove(file);
}

TEST(RunScenario, TimeoutExitsThreeAndLogsDeterministically) {
  nlohmann::json doc = nlohmann::json::parse(slurp(kSource / "scenarios" / "reference_slalom.json"));
  doc["classifier"]["weights"] = (kSource / "models" / "cone_cnn.json").string();
  doc["mission"]["timeout"] = 1.0;
  const fs::path file = temp_file("timeout.json");
  std::ofstream(file) << doc.dump();
  RunOptions opt;
  opt.scenario = file;
  opt.log_out = temp_file("log_a.jsonl");
  opt.metrics_out = temp_file("metrics.json");
  EXPECT_EQ(run_scenario(opt), 3);
  const std::string a = slurp(opt.log_out);
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 10);
  opt.log_out = temp_file("log_b.jsonl");
  EXPECT_EQ(run_scenario(opt), 3);
  EXPECT_EQ(slurp(opt.log_out), a);
  const auto metrics = nlohmann::json::parse(slurp(opt.metrics_out));
  EXPECT_FALSE(metrics["completed"].get<bool>());
  for (const auto& f : {file, temp_file("log_a.jsonl"), temp_file("log_b.jsonl"), temp_file("metrics.json")}) fs::remove(f);
}
