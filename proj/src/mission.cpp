#include "conedet/mission.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <csignal>
#include <fstream>
#include <iostream>
#include <numeric>
#include <thread>

#include "conedet/ws_server.hpp"

namespace conedet::mission {

std::string to_string(MissionMode m) { return m == MissionMode::autonomous ? "autonomous" : "manual"; }

MissionMode mission_mode_from_string(const std::string& s) {
  if (s == "autonomous") return MissionMode::autonomous;
  if (s == "manual") return MissionMode::manual;
  throw std::invalid_argument("unknown mode '" + s + "' (expected manual or autonomous)");
}

// ---------------------------------------------------------------------------
// Configuration

MissionConfig mission_config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  MissionConfig c;
  c.scenario = sim::scenario_from_json(doc);
  c.scenario.validate();

  lidar::DetectionConstraints det;
  det.sensor_height = c.scenario.lidar.mount_height;
  c.detector = lidar::constraints_from_json(doc.value("detector", nlohmann::json::object()), det);

  const auto cls = doc.value("classifier", nlohmann::json::object());
  c.classifier.kind = cls.value("kind", std::string(cls.contains("weights") ? "cnn" : "colour"));
  if (c.classifier.kind != "cnn" && c.classifier.kind != "prefiltered" && c.classifier.kind != "colour")
    throw std::invalid_argument("classifier.kind must be cnn, prefiltered or colour");
  if (cls.contains("weights")) {
    std::filesystem::path w = cls["weights"].get<std::string>();
    c.classifier.weights = w.is_relative() && !base_dir.empty() ? base_dir / w : w;
  }
  c.classifier.threshold = cls.value("threshold", c.classifier.kind == "colour" ? c.classifier.prefilter.colour.threshold : 0.5);
  c.classifier.crop.input_size = cls.value("input_size", c.classifier.crop.input_size);
  c.classifier.crop.margin = cls.value("crop_margin", c.classifier.crop.margin);
  c.classifier.crop.cone_height = cls.value("cone_height", c.classifier.crop.cone_height);
  c.classifier.crop.cone_base = cls.value("cone_base", c.classifier.crop.cone_base);

  c.planner = planning::planner_config_from_json(doc.value("planner", nlohmann::json::object()));

  drive::PursuitConfig pd;
  pd.wheelbase = c.scenario.vehicle.wheelbase;
  pd.max_steer = c.scenario.vehicle.max_steer;
  c.pursuit = drive::pursuit_config_from_json(doc.value("pursuit", nlohmann::json::object()), pd);

  const auto m = doc.value("mission", nlohmann::json::object());
  c.mission.dt = m.value("dt", c.mission.dt);
  c.mission.timeout = m.value("timeout", c.mission.timeout);
  const std::string src = m.value("pose_source", std::string("ground_truth"));
  if (src == "ground_truth") c.mission.pose_source = PoseSource::ground_truth;
  else if (src == "dead_reckoning") c.mission.pose_source = PoseSource::dead_reckoning;
  else throw std::invalid_argument("mission.pose_source must be ground_truth or dead_reckoning");
  c.mission.encoder_noise = m.value("encoder_noise", c.mission.encoder_noise);
  c.mission.mode = mission_mode_from_string(m.value("mode", std::string("autonomous")));
  c.mission.dedup_radius = m.value("dedup_radius", c.mission.dedup_radius);
  c.mission.match_radius = m.value("match_radius", c.mission.match_radius);
  if (!(c.mission.dt > 0.0)) throw std::invalid_argument("mission.dt must be positive");
  if (!(c.mission.timeout > 0.0)) throw std::invalid_argument("mission.timeout must be positive");
  if (c.mission.encoder_noise < 0.0) throw std::invalid_argument("mission.encoder_noise must be >= 0");
  return c;
}

MissionConfig load_mission_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::invalid_argument("cannot open scenario file " + file.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("scenario is not valid JSON: ") + e.what());
  }
  return mission_config_from_json(doc, file.parent_path());
}

vision::Scorer make_classifier(const ClassifierSettings& s, std::shared_ptr<const vision::CnnClassifier> cnn) {
  if (s.kind == "colour") return vision::colour_scorer(s.prefilter.colour);
  if (!cnn) throw std::invalid_argument("classifier kind '" + s.kind + "' needs weights");
  if (s.kind == "prefiltered") {
    return [cnn, p = s.prefilter](const RgbImage& img) { return vision::prefiltered_cnn(img, *cnn, p); };
  }
  return [cnn](const RgbImage& img) { return cnn->score(img); };
}

// ---------------------------------------------------------------------------
// Telemetry and commands

namespace {

nlohmann::json pose_json(const Pose2D& p) { return {{"x", p.x}, {"y", p.y}, {"theta", p.theta}}; }

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  const double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
  return distance(p, a + t * ab);
}

double finite_number(const nlohmann::json& msg, const char* key) {
  if (!msg.contains(key) || !msg[key].is_number()) throw std::invalid_argument(std::string("field '") + key + "' must be a number");
  const double v = msg[key].get<double>();
  if (!std::isfinite(v)) throw std::invalid_argument(std::string("field '") + key + "' must be finite");
  return v;
}

}  // namespace

nlohmann::json to_json(const TelemetryFrame& f) {
  nlohmann::json driven = nlohmann::json::array();
  for (const auto& p : f.driven_tail) driven.push_back({p.x, p.y});
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : f.candidates)
    cands.push_back({{"x", c.local.x},
                     {"y", c.local.y},
                     {"z", c.local.z},
                     {"points", c.point_count},
                     {"classified", c.classified},
                     {"score", c.score},
                     {"accepted", c.accepted}});
  return {{"type", "telemetry"},
          {"t", f.t},
          {"mode", to_string(f.mode)},
          {"pose", {{"estimated", pose_json(f.estimated)}, {"truth", pose_json(f.truth)}}},
          {"cones", f.cones},
          {"planned_path", planning::to_json(f.path)},
          {"driven_path", driven},
          {"candidates", cands},
          {"control", {{"steer", f.steer}, {"speed", f.speed}}},
          {"goal_reached", f.goal_reached},
          {"status", f.status}};
}

Command parse_command(const nlohmann::json& msg, double max_steer) {
  if (!msg.is_object()) throw std::invalid_argument("message must be a JSON object");
  if (msg.value("type", std::string()) != "command") throw std::invalid_argument("expected type 'command'");
  if (!msg.contains("name") || !msg["name"].is_string()) throw std::invalid_argument("command needs a string 'name'");
  Command c;
  c.name = msg["name"].get<std::string>();
  if (c.name == "set_mode") {
    if (!msg.contains("mode") || !msg["mode"].is_string()) throw std::invalid_argument("set_mode needs 'mode'");
    c.mode = mission_mode_from_string(msg["mode"].get<std::string>());
  } else if (c.name == "manual_drive") {
    c.steer = finite_number(msg, "steer");
    c.speed = finite_number(msg, "speed");
    if (std::abs(c.steer) > max_steer) throw std::invalid_argument("steer exceeds max_steer");
  } else if (c.name == "place_cone" || c.name == "place_distractor") {
    c.x = finite_number(msg, "x");
    c.y = finite_number(msg, "y");
  } else if (c.name != "reset_map") {
    throw std::invalid_argument("unknown command '" + c.name + "'");
  }
  return c;
}

std::uint64_t sliding_window_count(int width, int height, int window, int stride) {
  if (window <= 0 || stride <= 0) throw std::invalid_argument("sliding window: window and stride must be positive");
  if (width < window || height < window) return 0;
  return static_cast<std::uint64_t>((width - window) / stride + 1) * static_cast<std::uint64_t>((height - window) / stride + 1);
}

// ---------------------------------------------------------------------------
// Mission

Mission::Mission(MissionConfig config, vision::Scorer classifier)
    : config_(std::move(config)),
      classifier_(std::move(classifier)),
      plant_(config_.scenario.vehicle, config_.scenario.rng_seed),
      encoder_rng_(sim::substream_seed(config_.scenario.rng_seed, "encoder")),
      map_(config_.mission.dedup_radius),
      mode_(config_.mission.mode) {
  config_.scenario.validate();
  config_.detector.validate();
  config_.planner.validate();
  config_.pursuit.validate();
  if (!classifier_) throw std::invalid_argument("mission: classifier required");
  truth_ = {config_.scenario.vehicle.start, 0.0};
  estimate_ = {Pose2D{}, 0.0};
  path_ = planning::plan({}, Pose2D{}, config_.planner, 0);
}

Pose2D Mission::truth_pose() const {
  const Pose2D& start = config_.scenario.vehicle.start;
  const Vec2 p = global_to_local(start, truth_.pose.position());
  return Pose2D::make(p.x, p.y, truth_.pose.theta - start.theta);
}

std::vector<Vec2> Mission::true_cones() const {
  std::vector<Vec2> out;
  for (const auto& o : config_.scenario.objects)
    if (o.kind == sim::ObjectKind::cone) out.push_back(global_to_local(config_.scenario.vehicle.start, o.position));
  return out;
}

nlohmann::json Mission::submit(const nlohmann::json& msg) {
  nlohmann::json reply;
  if (msg.is_object() && msg.contains("id")) reply["id"] = msg["id"];
  try {
    Command c = parse_command(msg, config_.scenario.vehicle.max_steer);
    reply["type"] = "ack";
    reply["name"] = c.name;
    std::lock_guard lock(inbox_mutex_);
    inbox_.push_back(std::move(c));
  } catch (const std::exception& e) {
    reply["type"] = "error";
    reply["message"] = e.what();
  }
  return reply;
}

void Mission::apply(const Command& c) {
  const Pose2D& start = config_.scenario.vehicle.start;
  if (c.name == "set_mode") {
    mode_ = c.mode;
    if (mode_ == MissionMode::autonomous) goal_reached_ = false;
  } else if (c.name == "manual_drive") {
    manual_steer_ = std::clamp(c.steer, -config_.scenario.vehicle.max_steer, config_.scenario.vehicle.max_steer);
    manual_speed_ = c.speed;
  } else if (c.name == "place_cone") {
    config_.scenario.objects.push_back(sim::make_cone(local_to_global(start, {c.x, c.y})));
  } else if (c.name == "place_distractor") {
    config_.scenario.objects.push_back(sim::make_reflector(local_to_global(start, {c.x, c.y})));
  } else if (c.name == "reset_map") {
    map_.reset();
    dirty_ = true;
  } else {
    throw std::invalid_argument("unknown command '" + c.name + "'");
  }
}

void Mission::replan() {
  dirty_ = false;
  try {
    path_ = planning::plan(map_.positions(), Pose2D{}, config_.planner, path_.version + 1);
  } catch (const std::exception& e) {
    mode_ = MissionMode::manual;
    status_ = std::string("planner failure: ") + e.what();
  }
}

TelemetryFrame Mission::tick() {
  {
    std::deque<Command> pending;
    {
      std::lock_guard lock(inbox_mutex_);
      pending.swap(inbox_);
    }
    for (const auto& c : pending) apply(c);
  }

  const sim::Scenario& sc = config_.scenario;
  const double dt = config_.mission.dt;
  const Pose2D sensor_pose = truth_.pose;
  TelemetryFrame frame;

  // Perception: LiDAR candidates, then one crop per candidate from this tick's frame.
  const sim::PointCloud cloud = sim::scan(sc, sensor_pose, t_);
  const auto candidates = lidar::extract_candidates(cloud, config_.detector);
  stats_.candidates += candidates.size();
  std::optional<RgbImage> image;
  for (const auto& cand : candidates) {
    CandidateReport rep;
    rep.local = cand.centroid_local;
    rep.point_count = cand.point_count;
    const auto box = vision::candidate_box(sc.camera, sc.lidar.mount_height, cand.centroid_local, config_.classifier.crop);
    if (box) {
      if (!image) image = sim::render(sc, sensor_pose, sc.camera.intrinsics, t_);
      const RgbImage crop = crop_and_resize(*image, *box, config_.classifier.crop.input_size, config_.classifier.crop.input_size);
      double score = 0.0;
      try {
        const auto t0 = std::chrono::steady_clock::now();
        score = classifier_(crop);
        stats_.classify_ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      } catch (const std::exception& e) {
        mode_ = MissionMode::manual;
        status_ = std::string("classifier failure: ") + e.what();
      }
      ++stats_.classifier_invocations;
      ++stats_.classified;
      rep.classified = true;
      rep.score = score;
      rep.accepted = score >= config_.classifier.threshold;

      const Vec2 world = local_to_global(sensor_pose, {cand.centroid_local.x, cand.centroid_local.y});
      const bool is_cone = std::any_of(sc.objects.begin(), sc.objects.end(), [&](const sim::SceneObject& o) {
        return o.kind == sim::ObjectKind::cone && distance(o.position, world) <= config_.mission.match_radius;
      });
      auto& cc = stats_.confusion;
      (rep.accepted ? (is_cone ? cc.tp : cc.fp) : (is_cone ? cc.fn : cc.tn)) += 1;

      if (rep.accepted) {
        const auto r = map_.integrate({{cand.centroid_local.x, cand.centroid_local.y}, estimate_.pose, t_});
        if (r.added) {
          dirty_ = true;
          stats_.detection_ranges.push_back(std::hypot(cand.centroid_local.x, cand.centroid_local.y));
        }
      }
    }
    frame.candidates.push_back(rep);
  }
  if (dirty_) replan();

  // Control.
  double steer = 0.0, speed = 0.0;
  if (mode_ == MissionMode::autonomous) {
    try {
      ++stats_.pursue_invocations;
      const auto cmd = drive::pursue(path_.points, estimate_, config_.pursuit);
      if (cmd.goal_reached) {
        goal_reached_ = true;
        mode_ = MissionMode::manual;
        manual_steer_ = manual_speed_ = 0.0;
      } else {
        steer = cmd.steering;
        speed = cmd.speed;
      }
    } catch (const std::exception& e) {
      mode_ = MissionMode::manual;
      status_ = std::string("controller failure: ") + e.what();
    }
  } else {
    steer = manual_steer_;
    speed = manual_speed_;
  }
  const double max_steer = sc.vehicle.max_steer;
  steer = std::clamp(steer, -max_steer, max_steer);

  const Vec2 before = truth_.pose.position();
  truth_ = plant_.step(truth_, steer, speed, dt);
  const Vec2 after = truth_.pose.position();
  for (const auto& o : sc.objects)
    if (o.kind == sim::ObjectKind::cone)
      stats_.min_clearance = std::min(stats_.min_clearance, point_segment_distance(o.position, before, after));

  if (config_.mission.pose_source == PoseSource::ground_truth) {
    estimate_ = {truth_pose(), truth_.speed};
  } else {
    drive::EncoderReading r{plant_.applied_speed(), plant_.applied_steer(), dt};
    if (config_.mission.encoder_noise > 0.0) {
      std::normal_distribution<double> n(0.0, config_.mission.encoder_noise);
      r.wheel_speed *= 1.0 + n(encoder_rng_);
      r.steering_angle = std::clamp(r.steering_angle * (1.0 + n(encoder_rng_)), -max_steer, max_steer);
    }
    estimate_ = drive::dead_reckon(estimate_, r, sc.vehicle.wheelbase, max_steer);
  }

  ++stats_.ticks;
  t_ = static_cast<double>(stats_.ticks) * dt;
  driven_.push_back(estimate_.pose.position());
  while (driven_.size() > config_.mission.driven_tail) driven_.pop_front();

  frame.t = t_;
  frame.mode = mode_;
  frame.estimated = estimate_.pose;
  frame.truth = truth_pose();
  frame.cones = mapping::snapshot_json(map_);
  frame.path = path_;
  frame.driven_tail.assign(driven_.begin(), driven_.end());
  frame.steer = steer;
  frame.speed = speed;
  frame.goal_reached = goal_reached_;
  frame.status = status_;
  return frame;
}

std::string Mission::run_log_line(const TelemetryFrame& f) {
  return nlohmann::json{{"t", f.t}, {"x", f.estimated.x}, {"y", f.estimated.y}, {"theta", f.estimated.theta},
                        {"steer", f.steer}, {"v", f.speed}}
      .dump();
}

nlohmann::json Mission::metrics() const {
  const auto truth = true_cones();
  const double match = config_.mission.match_radius;
  std::vector<double> errors;
  int false_cones = 0;
  for (const auto& c : map_.cones()) {
    double best = 1e300;
    for (const auto& t : truth) best = std::min(best, distance(c.position, t));
    errors.push_back(best);
    if (best > match) ++false_cones;
  }
  int matched = 0;
  for (const auto& t : truth)
    if (std::any_of(map_.cones().begin(), map_.cones().end(), [&](const auto& c) { return distance(c.position, t) <= match; }))
      ++matched;

  const auto& r = stats_.detection_ranges;
  nlohmann::json ranges = {{"count", r.size()}};
  if (!r.empty()) {
    ranges["min"] = *std::min_element(r.begin(), r.end());
    ranges["max"] = *std::max_element(r.begin(), r.end());
    ranges["mean"] = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
  }

  const Pose2D tp = truth_pose();
  const auto& k = config_.scenario.camera.intrinsics;
  const std::uint64_t per_frame = sliding_window_count(k.width, k.height);
  const auto& cc = stats_.confusion;
  return {
      {"completed", goal_reached_},
      {"sim_time", t_},
      {"ticks", stats_.ticks},
      {"mode", to_string(mode_)},
      {"status", status_},
      {"cones",
       {{"true", truth.size()},
        {"mapped", map_.size()},
        {"matched", matched},
        {"false_cones", false_cones},
        {"position_errors", errors},
        {"max_position_error", errors.empty() ? 0.0 : *std::max_element(errors.begin(), errors.end())}}},
      {"detection_range", ranges},
      {"min_clearance", stats_.min_clearance},
      {"final_pose_error", distance(estimate_.pose.position(), tp.position())},
      {"final_heading_error", std::abs(normalize_angle(estimate_.pose.theta - tp.theta))},
      {"classifier",
       {{"kind", config_.classifier.kind},
        {"threshold", config_.classifier.threshold},
        {"accuracy", cc.accuracy()},
        {"tpr", cc.tpr()},
        {"fpr", cc.fpr()},
        {"counts", {{"tp", cc.tp}, {"fp", cc.fp}, {"tn", cc.tn}, {"fn", cc.fn}}},
        {"mean_ms", stats_.classifier_invocations ? stats_.classify_ms / static_cast<double>(stats_.classifier_invocations) : 0.0},
        {"invocations", stats_.classifier_invocations},
        {"candidates", stats_.candidates},
        {"classified", stats_.classified}}},
      {"sliding_window",
       {{"per_frame", per_frame},
        {"frames", stats_.ticks},
        {"total", per_frame * stats_.ticks},
        {"invocation_ratio", stats_.ticks ? static_cast<double>(stats_.classifier_invocations) / static_cast<double>(per_frame * stats_.ticks) : 0.0}}},
      {"pursue_invocations", stats_.pursue_invocations},
      {"path_version", path_.version},
  };
}

// ---------------------------------------------------------------------------
// CLI entry

namespace {

std::atomic<bool> g_stop{false};
void on_signal(int) { g_stop = true; }

}  // namespace

int run_scenario(const RunOptions& opt) {
  MissionConfig cfg;
  vision::Scorer scorer;
  try {
    cfg = load_mission_config(opt.scenario);
    if (opt.seed) cfg.scenario.rng_seed = *opt.seed;
    if (opt.mode) cfg.mission.mode = *opt.mode;
    std::shared_ptr<const vision::CnnClassifier> cnn;
    if (cfg.classifier.kind != "colour") {
      if (cfg.classifier.weights.empty()) throw std::invalid_argument("classifier.weights is required for kind " + cfg.classifier.kind);
      cnn = std::make_shared<vision::CnnClassifier>(vision::load_weights(cfg.classifier.weights));
    }
    scorer = make_classifier(cfg.classifier, cnn);
  } catch (const std::exception& e) {
    std::cerr << "invalid scenario: " << e.what() << '\n';
    return 2;
  }

  Mission mission(cfg, scorer);
  std::ofstream log;
  if (!opt.log_out.empty()) {
    log.open(opt.log_out);
    if (!log) {
      std::cerr << "cannot write run log " << opt.log_out << '\n';
      return 2;
    }
  }

  auto write_metrics = [&] {
    if (opt.metrics_out.empty()) return;
    std::ofstream out(opt.metrics_out);
    out << mission.metrics().dump(2) << '\n';
  };

  if (opt.serve_port) {
    TelemetryServer server(*opt.serve_port, [&mission](const nlohmann::json& msg) { return mission.submit(msg); });
    std::cout << "serving ws://127.0.0.1:" << server.port() << "/ws (Ctrl-C to stop)" << std::endl;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    const auto period = std::chrono::duration<double>(cfg.mission.dt);
    auto next = std::chrono::steady_clock::now();
    while (!g_stop) {
      const TelemetryFrame f = mission.tick();
      if (log) log << Mission::run_log_line(f) << '\n';
      server.broadcast(to_json(f).dump());
      next += std::chrono::duration_cast<std::chrono::steady_clock::duration>(period);
      std::this_thread::sleep_until(next);
    }
    write_metrics();
    return 0;
  }

  while (!mission.goal_reached() && mission.time() < cfg.mission.timeout - 1e-9) {
    const TelemetryFrame f = mission.tick();
    if (log) log << Mission::run_log_line(f) << '\n';
  }
  write_metrics();
  const auto m = mission.metrics();
  std::cout << "completed=" << m["completed"] << " sim_time=" << m["sim_time"] << " cones_mapped=" << m["cones"]["mapped"]
            << " false_cones=" << m["cones"]["false_cones"] << " min_clearance=" << m["min_clearance"] << '\n';
  if (!mission.goal_reached()) {
    std::cerr << "timeout after " << mission.time() << " s\n";
    return 3;
  }
  return 0;
}

}  // namespace conedet::mission
