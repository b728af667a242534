#include "conedet/sim_world.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace conedet::sim {

namespace {

constexpr double kNearPlane = 0.05;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double hash_uniform(std::uint64_t h) { return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53; }

struct Ray {
  Eigen::Vector3d origin;
  Eigen::Vector3d dir;  // unit
};

// Nearest t > 0 where the ray meets the lateral surface of an upright right
// circular cone standing on the ground.
std::optional<double> intersect_cone(const Ray& ray, const SceneObject& cone) {
  const double r = 0.5 * cone.base_width;
  const double h = cone.height;
  const double k = r / h;
  const double k2 = k * k;
  const double ox = ray.origin.x() - cone.position.x;
  const double oy = ray.origin.y() - cone.position.y;
  const double oz = ray.origin.z();
  const double dx = ray.dir.x(), dy = ray.dir.y(), dz = ray.dir.z();
  const double hz = h - oz;

  const double a = dx * dx + dy * dy - k2 * dz * dz;
  const double b = 2.0 * (ox * dx + oy * dy + k2 * hz * dz);
  const double c = ox * ox + oy * oy - k2 * hz * hz;

  double roots[2];
  int nroots = 0;
  if (std::abs(a) < 1e-14) {
    if (std::abs(b) < 1e-14) return std::nullopt;
    roots[nroots++] = -c / b;
  } else {
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return std::nullopt;
    const double sq = std::sqrt(disc);
    // Numerically stable quadratic roots.
    const double q = -0.5 * (b + std::copysign(sq, b));
    roots[nroots++] = q / a;
    if (q != 0.0) roots[nroots++] = c / q;
  }
  std::optional<double> best;
  for (int i = 0; i < nroots; ++i) {
    const double t = roots[i];
    if (!(t > 1e-9)) continue;
    const double z = oz + t * dz;
    if (z < 0.0 || z > h) continue;
    if (!best || t < *best) best = t;
  }
  return best;
}

// Slab test against the object's axis-aligned box.
std::optional<double> intersect_box(const Ray& ray, const SceneObject& box) {
  const double half_d = 0.5 * box.depth();
  const double half_w = 0.5 * box.base_width;
  const double lo[3] = {box.position.x - half_d, box.position.y - half_w, box.elevation};
  const double hi[3] = {box.position.x + half_d, box.position.y + half_w, box.elevation + box.height};
  double t_enter = -std::numeric_limits<double>::infinity();
  double t_exit = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    const double o = ray.origin[i];
    const double d = ray.dir[i];
    if (std::abs(d) < 1e-15) {
      if (o < lo[i] || o > hi[i]) return std::nullopt;
      continue;
    }
    double t0 = (lo[i] - o) / d;
    double t1 = (hi[i] - o) / d;
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
  }
  if (t_enter > t_exit || t_exit <= 1e-9) return std::nullopt;
  return t_enter > 1e-9 ? t_enter : t_exit;
}

double surface_reflectivity(const SceneObject& obj, double z) {
  const double rel = (z - obj.elevation) / obj.height;
  const bool stripe = rel >= obj.stripe_band.lo && rel <= obj.stripe_band.hi && obj.stripe_band.hi > obj.stripe_band.lo;
  return stripe ? obj.reflectivity_stripe : obj.reflectivity_body;
}

double attenuate(double reflectivity, double range, const LidarConfig& lidar) {
  double value = reflectivity;
  if (lidar.falloff_gamma > 0.0) value *= std::min(1.0, std::pow(lidar.falloff_ref / range, lidar.falloff_gamma));
  return std::clamp(std::round(value), 0.0, 255.0);
}

Rgb shade(Rgb c, double light) {
  Rgb out{};
  for (int i = 0; i < 3; ++i) out[i] = static_cast<std::uint8_t>(std::clamp(std::lround(c[i] * light), 0L, 255L));
  return out;
}

struct ScreenPt {
  double u, v;
};

// Projection without frustum rejection; caller guarantees positive depth.
ScreenPt project_unbounded(const Point3& p, const CameraIntrinsics& k) {
  return {k.cx + k.fx * p.x / p.z, k.cy + k.fy * p.y / p.z};
}

std::vector<ScreenPt> convex_hull(std::vector<ScreenPt> pts) {
  std::sort(pts.begin(), pts.end(), [](const ScreenPt& a, const ScreenPt& b) { return a.u < b.u || (a.u == b.u && a.v < b.v); });
  if (pts.size() < 3) return pts;
  auto turn = [](const ScreenPt& o, const ScreenPt& a, const ScreenPt& b) {
    return (a.u - o.u) * (b.v - o.v) - (a.v - o.v) * (b.u - o.u);
  };
  std::vector<ScreenPt> hull(2 * pts.size());
  std::size_t n = 0;
  for (const auto& p : pts) {
    while (n >= 2 && turn(hull[n - 2], hull[n - 1], p) <= 0) --n;
    hull[n++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = n + 1; i-- > 0;) {
    while (n >= lower && turn(hull[n - 2], hull[n - 1], pts[i]) <= 0) --n;
    hull[n++] = pts[i];
  }
  hull.resize(n - 1);
  return hull;
}

// Fills a convex polygon (either winding) by pixel-centre inclusion.
void fill_convex(RgbImage& img, const std::vector<ScreenPt>& poly, Rgb color, const RenderWindow& win) {
  if (poly.size() < 3) return;
  double umin = poly[0].u, umax = poly[0].u, vmin = poly[0].v, vmax = poly[0].v;
  double area2 = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % poly.size()];
    umin = std::min(umin, a.u);
    umax = std::max(umax, a.u);
    vmin = std::min(vmin, a.v);
    vmax = std::max(vmax, a.v);
    area2 += a.u * b.v - b.u * a.v;
  }
  if (area2 == 0.0) return;
  const double orient = area2 > 0 ? 1.0 : -1.0;
  const int u_lo = std::max(win.u0, static_cast<int>(std::floor(umin - 0.5)));
  const int u_hi = std::min(win.u1 - 1, static_cast<int>(std::ceil(umax)));
  const int v_lo = std::max(win.v0, static_cast<int>(std::floor(vmin - 0.5)));
  const int v_hi = std::min(win.v1 - 1, static_cast<int>(std::ceil(vmax)));
  for (int v = v_lo; v <= v_hi; ++v) {
    const double pv = v + 0.5;
    for (int u = u_lo; u <= u_hi; ++u) {
      const double pu = u + 0.5;
      bool inside = true;
      for (std::size_t i = 0; i < poly.size() && inside; ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % poly.size()];
        const double e = (b.u - a.u) * (pv - a.v) - (b.v - a.v) * (pu - a.u);
        inside = orient * e >= 0.0;
      }
      if (inside) img.set(u, v, color);
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------

void LidarConfig::validate() const {
  if (channels < 1) throw std::invalid_argument("lidar channels must be >= 1");
  if (!(vertical_step > 0.0) || !(horizontal_step > 0.0)) throw std::invalid_argument("lidar steps must be positive");
  if (std::abs(vertical_fov / vertical_step + 1.0 - channels) > 1e-6)
    throw std::invalid_argument("lidar channels must equal vertical span / vertical step + 1");
  const double n = 2.0 * kPi / horizontal_step;
  if (std::abs(n - std::round(n)) * horizontal_step > horizontal_step)
    throw std::invalid_argument("lidar horizontal step must divide 2*pi");
  if (!(max_range > 0.0)) throw std::invalid_argument("lidar max_range must be positive");
  if (!(mount_height > 0.0)) throw std::invalid_argument("lidar mount_height must be positive");
  if (scan_rate < 5.0 || scan_rate > 20.0) throw std::invalid_argument("lidar scan_rate must lie in [5, 20] Hz");
}

int LidarConfig::azimuth_count() const { return static_cast<int>(std::lround(2.0 * kPi / horizontal_step)); }

double LidarConfig::ring_elevation(int ring) const { return -0.5 * vertical_fov + ring * vertical_step; }

double LidarConfig::azimuth(int index) const {
  const int n = azimuth_count();
  const int i = ((index % n) + n) % n;
  return normalize_angle(i * (2.0 * kPi / n));
}

void SceneObject::validate() const {
  if (!(height > 0.0) || !(base_width > 0.0)) throw std::invalid_argument("object height and base_width must be positive");
  if (kind == ObjectKind::cone && reflectivity_stripe < reflectivity_body)
    throw std::invalid_argument("cone stripe reflectivity must not be below body reflectivity");
}

double SceneObject::depth() const { return kind == ObjectKind::reflector ? std::min(0.05, base_width) : base_width; }

SceneObject make_cone(Vec2 position) {
  SceneObject c;
  c.position = position;
  return c;
}

SceneObject make_reflector(Vec2 position) {
  SceneObject r;
  r.kind = ObjectKind::reflector;
  r.position = position;
  r.height = 0.15;
  r.base_width = 0.35;
  r.elevation = 0.35;
  r.reflectivity_body = 230.0;
  r.reflectivity_stripe = 250.0;
  r.stripe_band = {0.35, 0.65};
  r.color_body = {200, 25, 25};
  r.color_stripe = {240, 240, 240};
  return r;
}

SceneObject make_block(Vec2 position) {
  SceneObject o;
  o.kind = ObjectKind::block;
  o.position = position;
  o.height = 0.6;
  o.base_width = 0.6;
  o.reflectivity_body = 60.0;
  o.reflectivity_stripe = 60.0;
  o.stripe_band = {0.0, 0.0};
  o.color_body = {110, 110, 120};
  return o;
}

void Scenario::validate() const {
  lidar.validate();
  camera.intrinsics.validate();
  camera.mount.validate();
  if (!(vehicle.wheelbase > 0.0) || !(vehicle.max_steer > 0.0))
    throw std::invalid_argument("vehicle wheelbase and max_steer must be positive");
  for (const auto& o : objects) o.validate();
}

std::uint64_t substream_seed(std::uint64_t seed, std::string_view name, std::uint64_t index) {
  std::uint64_t h = splitmix64(seed);
  for (char c : name) h = splitmix64(h ^ static_cast<unsigned char>(c));
  return splitmix64(h ^ splitmix64(index));
}

// ---------------------------------------------------------------------------

PointCloud scan(const Scenario& scenario, const Pose2D& pose, double stamp) {
  const LidarConfig& lidar = scenario.lidar;
  PointCloud cloud;
  cloud.stamp = stamp;

  std::mt19937_64 rng(substream_seed(scenario.rng_seed, "scan", std::bit_cast<std::uint64_t>(stamp)));
  std::normal_distribution<double> range_noise(0.0, lidar.range_noise > 0.0 ? lidar.range_noise : 1.0);

  const int n_az = lidar.azimuth_count();
  const Eigen::Vector3d origin(pose.x, pose.y, lidar.mount_height);
  for (int ring = 0; ring < lidar.channels; ++ring) {
    const double elev = lidar.ring_elevation(ring);
    const double ce = std::cos(elev);
    const double se = std::sin(elev);
    for (int ai = 0; ai < n_az; ++ai) {
      const double az = lidar.azimuth(ai);
      const double heading = pose.theta + az;
      const Ray ray{origin, Eigen::Vector3d(ce * std::cos(heading), ce * std::sin(heading), se)};

      double best_t = std::numeric_limits<double>::infinity();
      int best_obj = -2;
      if (se < 0.0) {
        best_t = -origin.z() / se;
        best_obj = -1;
      }
      for (std::size_t oi = 0; oi < scenario.objects.size(); ++oi) {
        const SceneObject& obj = scenario.objects[oi];
        const auto t = obj.kind == ObjectKind::cone ? intersect_cone(ray, obj) : intersect_box(ray, obj);
        if (t && *t < best_t) {
          best_t = *t;
          best_obj = static_cast<int>(oi);
        }
      }
      if (best_obj == -2 || best_t > lidar.max_range) continue;

      double range = best_t;
      if (lidar.range_noise > 0.0) range = std::max(0.0, range + lidar.range_noise * range_noise(rng));
      const double hit_z = origin.z() + best_t * se;
      const double refl = best_obj < 0 ? scenario.ground_reflectivity
                                       : surface_reflectivity(scenario.objects[best_obj], hit_z);
      LidarPoint pt;
      pt.position = {range * ce * std::cos(az), range * ce * std::sin(az), range * se};
      pt.intensity = attenuate(refl, best_t, lidar);
      pt.ring = ring;
      pt.object = best_obj;
      cloud.points.push_back(pt);
    }
  }
  return cloud;
}

namespace {

// Closed-form test whether the ray at (elevation, azimuth) from a sensor at
// height H strikes an upright cone whose axis stands `distance` ahead.
// Along the ray's horizontal distance s, the surface gap
//   g(s) = |ray(s) - axis|_xy + k * z(s) - k * h,   k = r / h,
// is convex; the ray hits iff min g <= 0 over the part of the ray with
// 0 <= z <= h that lies within range.
bool ray_hits_cone(double tan_e, double cos_e, double az, double distance, const SceneObject& cone,
                   const LidarConfig& lidar) {
  const double ca = std::cos(az);
  if (ca <= 0.0) return false;
  const double q = distance * ca;
  const double p = distance * std::abs(std::sin(az));
  const double r = 0.5 * cone.base_width;
  const double h = cone.height;
  const double k = r / h;
  const double H = lidar.mount_height;

  double lo = 0.0;
  double hi = lidar.max_range * cos_e;
  if (tan_e == 0.0) {
    if (H < 0.0 || H > h) return false;
  } else {
    const double s0 = -H / tan_e;
    const double s1 = (h - H) / tan_e;
    lo = std::max(lo, std::min(s0, s1));
    hi = std::min(hi, std::max(s0, s1));
  }
  if (!(lo <= hi)) return false;

  const double m = k * tan_e;
  auto gap = [&](double s) { return std::hypot(s - q, p) + m * s + k * (H - h); };
  double best = std::min(gap(lo), gap(hi));
  if (std::abs(m) < 1.0) {
    const double s_star = std::clamp(q - m * p / std::sqrt(1.0 - m * m), lo, hi);
    best = std::min(best, gap(s_star));
  }
  return best <= 0.0;
}

}  // namespace

int expected_hits(const SceneObject& cone, double distance, const LidarConfig& lidar) {
  if (!(distance > 0.0)) throw std::invalid_argument("expected_hits: distance must be positive");
  const int n_az = lidar.azimuth_count();
  int count = 0;
  for (int ring = 0; ring < lidar.channels; ++ring) {
    const double e = lidar.ring_elevation(ring);
    const double tan_e = std::tan(e);
    const double cos_e = std::cos(e);
    // Hits form a contiguous azimuth interval around 0: the gap grows with
    // |azimuth|, so walk outward until the first miss on each side.
    if (!ray_hits_cone(tan_e, cos_e, lidar.azimuth(0), distance, cone, lidar)) continue;
    ++count;
    for (int i = 1; i < n_az / 2; ++i) {
      if (!ray_hits_cone(tan_e, cos_e, lidar.azimuth(i), distance, cone, lidar)) break;
      ++count;
    }
    for (int i = 1; i < n_az / 2; ++i) {
      if (!ray_hits_cone(tan_e, cos_e, lidar.azimuth(-i), distance, cone, lidar)) break;
      ++count;
    }
  }
  return count;
}

// ---------------------------------------------------------------------------

Point3 lidar_to_optical(const CameraConfig& camera, const Point3& p_lidar) {
  return vehicle_axes_to_optical(camera.mount.apply(p_lidar));
}

Point3 world_to_optical(const Scenario& scenario, const Pose2D& pose, const Point3& world) {
  const Vec2 local = global_to_local(pose, {world.x, world.y});
  return lidar_to_optical(scenario.camera, {local.x, local.y, world.z - scenario.lidar.mount_height});
}

RgbImage render(const Scenario& scenario, const Pose2D& pose, const CameraIntrinsics& k, double stamp,
                std::optional<RenderWindow> window) {
  RenderWindow win = window.value_or(RenderWindow{0, 0, k.width, k.height});
  win.u0 = std::clamp(win.u0, 0, k.width);
  win.u1 = std::clamp(win.u1, win.u0, k.width);
  win.v0 = std::clamp(win.v0, 0, k.height);
  win.v1 = std::clamp(win.v1, win.v0, k.height);

  const CameraConfig& cam = scenario.camera;
  const Rgb sky = shade(cam.sky, cam.light);
  const Rgb ground = shade(cam.ground, cam.light);
  RgbImage img(k.width, k.height, sky);

  // Sky/ground split: a pixel sees ground when its ray points downward.
  const Eigen::Matrix3d rt = cam.mount.rotation.transpose();
  for (int v = win.v0; v < win.v1; ++v) {
    for (int u = win.u0; u < win.u1; ++u) {
      const Point3 d_opt{(u + 0.5 - k.cx) / k.fx, (v + 0.5 - k.cy) / k.fy, 1.0};
      const Point3 d_veh = optical_to_vehicle_axes(d_opt);
      const double dz = rt(2, 0) * d_veh.x + rt(2, 1) * d_veh.y + rt(2, 2) * d_veh.z;
      if (dz < 0.0) img.set(u, v, ground);
    }
  }

  // Painter's algorithm: farthest object first.
  struct Item {
    double depth;
    std::size_t index;
  };
  std::vector<Item> order;
  for (std::size_t i = 0; i < scenario.objects.size(); ++i) {
    const auto& o = scenario.objects[i];
    const Point3 c = world_to_optical(scenario, pose, {o.position.x, o.position.y, o.elevation + 0.5 * o.height});
    if (c.z > kNearPlane) order.push_back({c.z, i});
  }
  std::stable_sort(order.begin(), order.end(), [](const Item& a, const Item& b) { return a.depth > b.depth; });

  const Vec2 cam_xy = local_to_global(pose, [&] {
    const Point3 c = cam.mount.inverse_apply({0.0, 0.0, 0.0});
    return Vec2{c.x, c.y};
  }());

  for (const Item& item : order) {
    const SceneObject& o = scenario.objects[item.index];
    const Rgb body = shade(o.color_body, cam.light);
    const Rgb stripe = shade(o.color_stripe, cam.light);
    const bool has_stripe = o.stripe_band.hi > o.stripe_band.lo;

    auto to_screen = [&](const Point3& w, ScreenPt& out) {
      const Point3 p = world_to_optical(scenario, pose, w);
      if (p.z <= kNearPlane) return false;
      out = project_unbounded(p, k);
      return true;
    };

    if (o.kind == ObjectKind::cone) {
      // Silhouette triangle facing the camera.
      Vec2 view = o.position - cam_xy;
      const double len = norm(view);
      if (len < 1e-9) continue;
      const Vec2 side{-view.y / len, view.x / len};
      const double r = 0.5 * o.base_width;
      const Point3 apex{o.position.x, o.position.y, o.height};
      const Point3 left{o.position.x + r * side.x, o.position.y + r * side.y, 0.0};
      const Point3 right{o.position.x - r * side.x, o.position.y - r * side.y, 0.0};
      ScreenPt a{}, l{}, rr{};
      if (!to_screen(apex, a) || !to_screen(left, l) || !to_screen(right, rr)) continue;
      fill_convex(img, {a, l, rr}, body, win);
      if (has_stripe) {
        auto lerp3 = [](const Point3& p, const Point3& q, double t) {
          return Point3{p.x + t * (q.x - p.x), p.y + t * (q.y - p.y), p.z + t * (q.z - p.z)};
        };
        ScreenPt l_lo{}, r_lo{}, l_hi{}, r_hi{};
        if (to_screen(lerp3(left, apex, o.stripe_band.lo), l_lo) && to_screen(lerp3(right, apex, o.stripe_band.lo), r_lo) &&
            to_screen(lerp3(left, apex, o.stripe_band.hi), l_hi) && to_screen(lerp3(right, apex, o.stripe_band.hi), r_hi))
          fill_convex(img, {l_lo, r_lo, r_hi, l_hi}, stripe, win);
      }
    } else {
      auto box_hull = [&](double z0, double z1, std::vector<ScreenPt>& hull) {
        const double hd = 0.5 * o.depth();
        const double hw = 0.5 * o.base_width;
        std::vector<ScreenPt> pts;
        for (double dx : {-hd, hd})
          for (double dy : {-hw, hw})
            for (double z : {z0, z1}) {
              ScreenPt s{};
              if (!to_screen({o.position.x + dx, o.position.y + dy, z}, s)) return false;
              pts.push_back(s);
            }
        hull = convex_hull(std::move(pts));
        return true;
      };
      std::vector<ScreenPt> hull;
      if (!box_hull(o.elevation, o.elevation + o.height, hull)) continue;
      fill_convex(img, hull, body, win);
      if (has_stripe && box_hull(o.elevation + o.stripe_band.lo * o.height, o.elevation + o.stripe_band.hi * o.height, hull))
        fill_convex(img, hull, stripe, win);
    }
  }

  if (cam.noise > 0.0) {
    const std::uint64_t frame = substream_seed(scenario.rng_seed, "pixel-noise", std::bit_cast<std::uint64_t>(stamp));
    for (int v = win.v0; v < win.v1; ++v) {
      for (int u = win.u0; u < win.u1; ++u) {
        Rgb px = img.at(u, v);
        const std::uint64_t base = splitmix64(frame ^ (static_cast<std::uint64_t>(v) << 32 | static_cast<std::uint32_t>(u)));
        for (int c = 0; c < 3; ++c) {
          const std::uint64_t h1 = splitmix64(base + 2 * c);
          const std::uint64_t h2 = splitmix64(base + 2 * c + 1);
          const double g = std::sqrt(-2.0 * std::log(hash_uniform(h1))) * std::cos(2.0 * kPi * hash_uniform(h2));
          px[c] = static_cast<std::uint8_t>(std::clamp(std::lround(px[c] + cam.noise * g), 0L, 255L));
        }
        img.set(u, v, px);
      }
    }
  }
  return img;
}

// ---------------------------------------------------------------------------

Plant::Plant(VehicleConfig config, std::uint64_t seed) : config_(config), rng_(substream_seed(seed, "plant")) {}

VehicleState Plant::step(const VehicleState& state, double steer, double speed, double dt) {
  if (config_.actuator_noise > 0.0) {
    std::normal_distribution<double> n(0.0, config_.actuator_noise);
    speed *= 1.0 + n(rng_);
    steer = std::clamp(steer * (1.0 + n(rng_)), -config_.max_steer, config_.max_steer);
  }
  applied_steer_ = steer;
  applied_speed_ = speed;
  return step_plant(state, steer, speed, dt, config_);
}

VehicleState step_plant(const VehicleState& state, double steer, double speed, double dt, const VehicleConfig& vehicle) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_plant: dt must be positive");
  if (std::abs(steer) > vehicle.max_steer + 1e-12) throw std::invalid_argument("step_plant: steering exceeds max_steer");
  VehicleState next;
  next.pose = speed == 0.0 ? state.pose : bicycle_rk4(state.pose, speed, steer, vehicle.wheelbase, dt);
  next.speed = speed;
  return next;
}

// ---------------------------------------------------------------------------

ObjectKind object_kind_from_string(const std::string& s) {
  if (s == "cone") return ObjectKind::cone;
  if (s == "reflector") return ObjectKind::reflector;
  if (s == "block") return ObjectKind::block;
  throw std::invalid_argument("unknown object kind '" + s + "'");
}

std::string to_string(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::cone: return "cone";
    case ObjectKind::reflector: return "reflector";
    case ObjectKind::block: return "block";
  }
  return "cone";
}

namespace {

Rgb rgb_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("colour must be an [r, g, b] array");
  return {j[0].get<std::uint8_t>(), j[1].get<std::uint8_t>(), j[2].get<std::uint8_t>()};
}

SceneObject object_from_json(const nlohmann::json& j) {
  const ObjectKind kind = object_kind_from_string(j.value("kind", std::string("cone")));
  const Vec2 pos{j.at("x").get<double>(), j.at("y").get<double>()};
  SceneObject o;
  switch (kind) {
    case ObjectKind::cone: o = make_cone(pos); break;
    case ObjectKind::reflector: o = make_reflector(pos); break;
    case ObjectKind::block: o = make_block(pos); break;
  }
  o.height = j.value("height", o.height);
  o.base_width = j.value("base_width", o.base_width);
  o.elevation = j.value("elevation", o.elevation);
  o.reflectivity_body = j.value("reflectivity_body", o.reflectivity_body);
  o.reflectivity_stripe = j.value("reflectivity_stripe", o.reflectivity_stripe);
  if (j.contains("stripe_band")) o.stripe_band = {j["stripe_band"].at(0).get<double>(), j["stripe_band"].at(1).get<double>()};
  if (j.contains("color_body")) o.color_body = rgb_from_json(j["color_body"]);
  if (j.contains("color_stripe")) o.color_stripe = rgb_from_json(j["color_stripe"]);
  return o;
}

Eigen::Matrix3d rotation_from_rpy(double roll, double pitch, double yaw) {
  return (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) * Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

}  // namespace

Scenario scenario_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("scenario must be a JSON object");
  Scenario s;
  s.rng_seed = doc.value("seed", std::uint64_t{1});
  s.ground_reflectivity = doc.value("ground_reflectivity", s.ground_reflectivity);

  if (doc.contains("lidar")) {
    const auto& j = doc["lidar"];
    LidarConfig& l = s.lidar;
    l.channels = j.value("channels", l.channels);
    l.vertical_fov = deg2rad(j.value("vertical_fov_deg", rad2deg(l.vertical_fov)));
    l.vertical_step = deg2rad(j.value("vertical_step_deg", rad2deg(l.vertical_step)));
    l.horizontal_step = deg2rad(j.value("horizontal_step_deg", rad2deg(l.horizontal_step)));
    l.scan_rate = j.value("scan_rate_hz", l.scan_rate);
    l.max_range = j.value("max_range", l.max_range);
    l.mount_height = j.value("mount_height", l.mount_height);
    l.falloff_gamma = j.value("falloff_gamma", l.falloff_gamma);
    l.falloff_ref = j.value("falloff_ref", l.falloff_ref);
    l.range_noise = j.value("range_noise", l.range_noise);
  }
  if (doc.contains("camera")) {
    const auto& j = doc["camera"];
    CameraIntrinsics& k = s.camera.intrinsics;
    k.fx = j.value("fx", k.fx);
    k.fy = j.value("fy", k.fy);
    k.width = j.value("width", k.width);
    k.height = j.value("height", k.height);
    k.cx = j.value("cx", k.cx);
    k.cy = j.value("cy", k.cy);
    if (j.contains("translation")) {
      const auto& t = j["translation"];
      s.camera.mount.translation = {t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>()};
    }
    if (j.contains("rotation_rpy_deg")) {
      const auto& r = j["rotation_rpy_deg"];
      s.camera.mount.rotation =
          rotation_from_rpy(deg2rad(r.at(0).get<double>()), deg2rad(r.at(1).get<double>()), deg2rad(r.at(2).get<double>()));
    }
    s.camera.light = j.value("light", s.camera.light);
    s.camera.noise = j.value("noise", s.camera.noise);
    if (j.contains("sky")) s.camera.sky = rgb_from_json(j["sky"]);
    if (j.contains("ground")) s.camera.ground = rgb_from_json(j["ground"]);
  }
  if (doc.contains("vehicle")) {
    const auto& j = doc["vehicle"];
    VehicleConfig& v = s.vehicle;
    v.wheelbase = j.value("wheelbase", v.wheelbase);
    v.max_steer = deg2rad(j.value("max_steer_deg", rad2deg(v.max_steer)));
    v.actuator_noise = j.value("actuator_noise", v.actuator_noise);
    if (j.contains("start")) {
      const auto& st = j["start"];
      v.start = Pose2D::make(st.value("x", 0.0), st.value("y", 0.0), deg2rad(st.value("theta_deg", 0.0)));
    }
  }
  if (doc.contains("objects")) {
    for (const auto& o : doc["objects"]) s.objects.push_back(object_from_json(o));
  }
  s.validate();
  return s;
}

nlohmann::json scenario_to_json(const Scenario& s) {
  using nlohmann::json;
  json objects = json::array();
  for (const auto& o : s.objects) {
    objects.push_back({{"kind", to_string(o.kind)},
                       {"x", o.position.x},
                       {"y", o.position.y},
                       {"height", o.height},
                       {"base_width", o.base_width},
                       {"elevation", o.elevation},
                       {"reflectivity_body", o.reflectivity_body},
                       {"reflectivity_stripe", o.reflectivity_stripe},
                       {"stripe_band", {o.stripe_band.lo, o.stripe_band.hi}},
                       {"color_body", o.color_body},
                       {"color_stripe", o.color_stripe}});
  }
  const auto& l = s.lidar;
  const auto& k = s.camera.intrinsics;
  const Eigen::Vector3d ypr = s.camera.mount.rotation.eulerAngles(2, 1, 0);
  return {{"seed", s.rng_seed},
          {"ground_reflectivity", s.ground_reflectivity},
          {"lidar",
           {{"channels", l.channels},
            {"vertical_fov_deg", rad2deg(l.vertical_fov)},
            {"vertical_step_deg", rad2deg(l.vertical_step)},
            {"horizontal_step_deg", rad2deg(l.horizontal_step)},
            {"scan_rate_hz", l.scan_rate},
            {"max_range", l.max_range},
            {"mount_height", l.mount_height},
            {"falloff_gamma", l.falloff_gamma},
            {"falloff_ref", l.falloff_ref},
            {"range_noise", l.range_noise}}},
          {"camera",
           {{"fx", k.fx},
            {"fy", k.fy},
            {"cx", k.cx},
            {"cy", k.cy},
            {"width", k.width},
            {"height", k.height},
            {"translation", {s.camera.mount.translation.x, s.camera.mount.translation.y, s.camera.mount.translation.z}},
            {"rotation_rpy_deg", {rad2deg(ypr[2]), rad2deg(ypr[1]), rad2deg(ypr[0])}},
            {"light", s.camera.light},
            {"noise", s.camera.noise},
            {"sky", s.camera.sky},
            {"ground", s.camera.ground}}},
          {"vehicle",
           {{"wheelbase", s.vehicle.wheelbase},
            {"max_steer_deg", rad2deg(s.vehicle.max_steer)},
            {"actuator_noise", s.vehicle.actuator_noise},
            {"start", {{"x", s.vehicle.start.x}, {"y", s.vehicle.start.y}, {"theta_deg", rad2deg(s.vehicle.start.theta)}}}}},
          {"objects", objects}};
}

}  // namespace conedet::sim
