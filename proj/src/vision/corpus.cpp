#include "conedet/vision/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <stdexcept>

namespace conedet::vision {

namespace {

std::string make_id(const char* prefix, int index) {
  std::ostringstream os;
  os << prefix << '_' << std::setw(6) << std::setfill('0') << index;
  return os.str();
}

sim::SceneObject random_reflector(Vec2 at, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  sim::SceneObject r = sim::make_reflector(at);
  r.height = 0.08 + 0.2 * u(rng);
  r.base_width = 0.2 + 0.35 * u(rng);
  r.elevation = 0.15 + 0.7 * u(rng);
  r.color_body = {static_cast<std::uint8_t>(150 + 90 * u(rng)), static_cast<std::uint8_t>(10 + 40 * u(rng)),
                  static_cast<std::uint8_t>(10 + 40 * u(rng))};
  if (u(rng) < 0.3) r.stripe_band = {0.0, 0.0};
  return r;
}

sim::SceneObject random_block(Vec2 at, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  sim::SceneObject b = sim::make_block(at);
  b.height = 0.3 + 0.6 * u(rng);
  b.base_width = 0.3 + 0.5 * u(rng);
  static constexpr Rgb palette[] = {{110, 110, 120}, {60, 60, 60}, {30, 70, 160}, {40, 130, 50}, {200, 200, 200}, {120, 80, 60}};
  b.color_body = palette[static_cast<std::size_t>(u(rng) * std::size(palette)) % std::size(palette)];
  return b;
}

}  // namespace

std::vector<CropSample> make_corpus(const sim::Scenario& base, const CorpusOptions& opt) {
  if (opt.n_per_class <= 0) throw std::invalid_argument("corpus: n_per_class must be positive");
  if (!(opt.min_distance > 0.0) || opt.max_distance < opt.min_distance)
    throw std::invalid_argument("corpus: bad distance range");

  std::vector<CropSample> out;
  out.reserve(2 * static_cast<std::size_t>(opt.n_per_class));
  const Pose2D origin{};
  const CameraIntrinsics& k = base.camera.intrinsics;

  for (int i = 0; i < 2 * opt.n_per_class; ++i) {
    const bool positive = i % 2 == 0;
    std::mt19937_64 rng(sim::substream_seed(opt.seed, "corpus", static_cast<std::uint64_t>(i)));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> n(0.0, 1.0);

    for (int attempt = 0;; ++attempt) {
      if (attempt > 100) throw std::runtime_error("corpus: could not place a visible sample");
      sim::Scenario s = base;
      s.objects.clear();
      s.rng_seed = rng();
      s.camera.light = opt.light + opt.light_jitter * (2.0 * u(rng) - 1.0);

      const double d = opt.min_distance + (opt.max_distance - opt.min_distance) * u(rng);
      const double bearing = deg2rad(opt.max_bearing_deg) * (2.0 * u(rng) - 1.0);
      const Vec2 target{d * std::cos(bearing), d * std::sin(bearing)};

      std::string kind = "cone";
      if (positive) {
        s.objects.push_back(sim::make_cone(target));
      } else {
        const double r = u(rng);
        if (r < 0.45) {
          kind = "reflector";
          s.objects.push_back(random_reflector(target, rng));
        } else if (r < 0.65) {
          kind = "block";
          s.objects.push_back(random_block(target, rng));
        } else {
          kind = "background";
        }
      }
      if (u(rng) < opt.clutter_probability) {
        const int count = 1 + static_cast<int>(u(rng) * 2.0);
        for (int c = 0; c < count; ++c) {
          const Vec2 at{3.0 + 37.0 * u(rng), -8.0 + 16.0 * u(rng)};
          if (distance(at, target) < 3.0) continue;
          s.objects.push_back(u(rng) < 0.6 ? sim::make_cone(at) : random_reflector(at, rng));
        }
      }

      // LiDAR returns come from the near face, so the centroid sits a little short.
      const Point3 candidate{target.x - 0.1 * u(rng) + opt.candidate_jitter * n(rng),
                             target.y + opt.candidate_jitter * n(rng), 0.0};
      const auto box = candidate_box(s.camera, s.lidar.mount_height, candidate, opt.crop);
      if (!box) continue;
      const sim::RenderWindow win{static_cast<int>(std::floor(box->u0)) - 1, static_cast<int>(std::floor(box->v0)) - 1,
                                  static_cast<int>(std::ceil(box->u1)) + 1, static_cast<int>(std::ceil(box->v1)) + 1};
      const RgbImage frame = sim::render(s, origin, k, 0.0, win);
      CropSample sample;
      sample.image = crop_and_resize(frame, *box, opt.crop.input_size, opt.crop.input_size);
      sample.label = positive ? Label::cone : Label::not_cone;
      sample.source_id = make_id(positive ? "pos" : ("neg_" + kind).c_str(), i / 2);
      out.push_back(std::move(sample));
      break;
    }
  }
  return out;
}

std::string to_string(Label label) { return label == Label::cone ? "cone" : "not_cone"; }

Label label_from_string(const std::string& s) {
  if (s == "cone" || s == "1") return Label::cone;
  if (s == "not_cone" || s == "0") return Label::not_cone;
  throw std::invalid_argument("unknown label '" + s + "'");
}

void save_corpus(const std::filesystem::path& dir, std::span<const CropSample> samples) {
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir / "labels.csv");
  if (!csv) throw std::runtime_error("cannot write " + (dir / "labels.csv").string());
  csv << "filename,label\n";
  for (const auto& s : samples) {
    const std::string file = s.source_id + ".ppm";
    write_ppm(dir / file, s.image);
    csv << file << ',' << to_string(s.label) << '\n';
  }
}

std::vector<CropSample> load_corpus(const std::filesystem::path& dir) {
  std::ifstream csv(dir / "labels.csv");
  if (!csv) throw std::runtime_error("corpus: missing " + (dir / "labels.csv").string());
  std::vector<CropSample> out;
  std::string line;
  bool first = true;
  while (std::getline(csv, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("corpus: malformed line '" + line + "'");
    const std::string file = line.substr(0, comma);
    const std::string label = line.substr(comma + 1);
    if (first) {
      first = false;
      if (file == "filename") continue;
    }
    CropSample s;
    s.image = read_ppm(dir / file);
    s.label = label_from_string(label);
    s.source_id = std::filesystem::path(file).stem().string();
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<LabSample> to_lab_samples(std::span<const CropSample> samples) {
  std::vector<LabSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back({rgb_to_lab(s.image), s.label});
  return out;
}

}  // namespace conedet::vision
