// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "prosg/dataio/synthetic.hpp"

#include "prosg/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

namespace prosg::dataio {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int checker(double a, double b) {
  return static_cast<int>(std::floor(a) + std::floor(b)) & 1;
}

// Texture contrast fades with range towards a haze colour.
std::array<double, 3> ground_color(double x, double y, double range) {
  const double c = checker(x / 2.0, y / 2.0) ? 0.07 : -0.07;
  const double low = 0.05 * std::sin(0.3 * x) * std::cos(0.4 * y);
  std::array<double, 3> rgb{0.36 + c + low, 0.34 + c + low, 0.31 + c + 0.5 * low};
  const double lane = std::abs(std::abs(y) - 1.5);
  if (lane < 0.12 && std::fmod(std::fmod(x, 3.0) + 3.0, 3.0) < 1.5) rgb = {0.85, 0.85, 0.8};
  const std::array<double, 3> haze{0.5, 0.52, 0.55};
  const double keep = std::exp(-range / 20.0);
  for (int k = 0; k < 3; ++k) rgb[k] = haze[k] + keep * (rgb[k] - haze[k]);
  return rgb;
}

std::array<double, 3> sky_color(const Vec3& d) {
  const double elev = std::asin(std::clamp(d.z(), -1.0, 1.0));
  const double azim = std::atan2(d.y(), d.x());
  const double c = checker(azim / (std::numbers::pi / 8.0), elev / (std::numbers::pi / 18.0)) ? 0.06 : -0.06;
  return {0.45 + c + 0.2 * elev, 0.62 + c + 0.25 * elev, 0.88 + 0.5 * c + 0.1 * elev};
}

// Object-to-world pose for a box whose long axis points along `yaw` and whose
// height axis is world z.
Pose box_pose(double x, double y, double half_height, double yaw) {
  Pose p;
  const double c = std::cos(yaw), s = std::sin(yaw);
  p.R << c, 0.0, s,
         s, 0.0, -c,
         0.0, 1.0, 0.0;
  p.t = Vec3(x, y, half_height);
  return p;
}

float quantize8(double v) {
  return static_cast<float>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)) / 255.0f;
}

}  // namespace

void SyntheticConfig::validate() const {
  if (width < 8 || height < 8) throw ConfigError("synthetic images must be at least 8x8");
  if (frames < 1) throw ConfigError("synthetic scene needs at least one frame");
  if (objects < 1 || objects > 3) throw ConfigError("synthetic scene supports 1 to 3 objects");
  if (!(focal > 0.0) || !(camera_height > 0.0)) throw ConfigError("focal and camera height must be positive");
  if (lidar_fraction < 0.0 || lidar_fraction > 1.0) throw ConfigError("lidar_fraction must lie in [0, 1]");
  if (!(lidar_range > 0.0)) throw ConfigError("lidar_range must be positive");
}

void to_json(nlohmann::json& j, const SyntheticConfig& c) {
  j = {{"width", c.width},
       {"height", c.height},
       {"frames", c.frames},
       {"objects", c.objects},
       {"seed", c.seed},
       {"focal", c.focal},
       {"camera_height", c.camera_height},
       {"camera_speed", c.camera_speed},
       {"pitch_deg", c.pitch_deg},
       {"lidar_fraction", c.lidar_fraction},
       {"lidar_range", c.lidar_range}};
}

void from_json(const nlohmann::json& j, SyntheticConfig& c) {
  const SyntheticConfig d;
  for (const auto& [key, value] : j.items()) {
    (void)value;
    static const std::vector<std::string> known{"width", "height", "frames", "objects", "seed", "focal",
                                                "camera_height", "camera_speed", "pitch_deg", "lidar_fraction",
                                                "lidar_range"};
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown synthetic scene key '" + key + "'");
    }
  }
  c.width = j.value("width", d.width);
  c.height = j.value("height", d.height);
  c.frames = j.value("frames", d.frames);
  c.objects = j.value("objects", d.objects);
  c.seed = j.value("seed", d.seed);
  c.focal = j.value("focal", d.focal);
  c.camera_height = j.value("camera_height", d.camera_height);
  c.camera_speed = j.value("camera_speed", d.camera_speed);
  c.pitch_deg = j.value("pitch_deg", d.pitch_deg);
  c.lidar_fraction = j.value("lidar_fraction", d.lidar_fraction);
  c.lidar_range = j.value("lidar_range", d.lidar_range);
}

SyntheticScene::SyntheticScene(const SyntheticConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  std::mt19937_64 rng(cfg_.seed);
  std::uniform_real_distribution<double> hue(0.0, 1.0);

  struct Motion {
    Vec3 size;
    double x0, y, speed, yaw0, yaw_rate;
  };
  const std::array<Motion, 3> motions{{
      {{4.0, 1.5, 1.8}, 10.0, -2.5, 0.35, 0.0, 0.02},
      {{4.4, 1.6, 1.9}, 24.0, 3.0, -0.3, std::numbers::pi, 0.0},
      {{2.0, 2.0, 2.0}, 25.0, -4.5, 0.0, 0.4, 0.0},
  }};
  for (int k = 0; k < cfg_.objects; ++k) {
    const auto& m = motions[static_cast<std::size_t>(k)];
    ObjectTrack t;
    t.id = k;
    t.cls = "car";
    t.size = m.size;
    for (int f = 0; f < cfg_.frames; ++f) {
      t.poses[f] = box_pose(m.x0 + m.speed * f, m.y, 0.5 * m.size.y(), m.yaw0 + m.yaw_rate * f);
    }
    tracks_.push_back(std::move(t));
    // Saturated colour from a random hue.
    const double h = hue(rng) * 6.0;
    const double x = 1.0 - std::abs(std::fmod(h, 2.0) - 1.0);
    std::array<double, 3> rgb{};
    switch (static_cast<int>(h) % 6) {
      case 0: rgb = {1, x, 0}; break;
      case 1: rgb = {x, 1, 0}; break;
      case 2: rgb = {0, 1, x}; break;
      case 3: rgb = {0, x, 1}; break;
      case 4: rgb = {x, 0, 1}; break;
      default: rgb = {1, 0, x}; break;
    }
    for (auto& v : rgb) v = 0.15 + 0.7 * v;
    colors_.push_back(rgb);
  }
}

Pose SyntheticScene::camera_pose(int frame) const {
  const double pitch = cfg_.pitch_deg * std::numbers::pi / 180.0;
  const double yaw = 0.03 * std::sin(0.2 * frame);
  Mat3 base;
  base << 0.0, 0.0, 1.0,
         -1.0, 0.0, 0.0,
          0.0, -1.0, 0.0;
  const Mat3 tilt = Eigen::AngleAxisd(-pitch, Vec3::UnitX()).toRotationMatrix();
  const Mat3 turn = Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
  Pose p;
  p.R = turn * base * tilt;
  p.t = Vec3(cfg_.camera_speed * frame, 0.3 * std::sin(0.3 * frame), cfg_.camera_height);
  return p;
}

Camera SyntheticScene::camera() const {
  Camera c;
  c.width = cfg_.width;
  c.height = cfg_.height;
  c.K << cfg_.focal, 0.0, 0.5 * cfg_.width,
         0.0, cfg_.focal, 0.5 * cfg_.height,
         0.0, 0.0, 1.0;
  return c;
}

TraceHit SyntheticScene::trace(const Vec3& origin, const Vec3& dir, int frame) const {
  TraceHit hit;
  hit.t = kInf;
  hit.node = kFarFieldNode;
  hit.rgb = sky_color(dir);

  if (dir.z() < 0.0) {
    const double t = -origin.z() / dir.z();
    if (t > 0.0) {
      const Vec3 p = origin + t * dir;
      hit = {t, kBackgroundNode, ground_color(p.x(), p.y(), t)};
    }
  }

  for (std::size_t k = 0; k < tracks_.size(); ++k) {
    const auto it = tracks_[k].poses.find(frame);
    if (it == tracks_[k].poses.end()) continue;
    const Pose& pose = it->second;
    const Vec3 half = 0.5 * tracks_[k].size;
    // Ray in the box frame (metric units).
    const Vec3 o = pose.R.transpose() * (origin - pose.t);
    const Vec3 d = pose.R.transpose() * dir;
    double t0 = -kInf, t1 = kInf;
    int axis = -1;
    bool miss = false;
    for (int a = 0; a < 3 && !miss; ++a) {
      if (std::abs(d[a]) < 1e-15) {
        if (std::abs(o[a]) > half[a]) miss = true;
        continue;
      }
      double lo = (-half[a] - o[a]) / d[a];
      double hi = (half[a] - o[a]) / d[a];
      if (lo > hi) std::swap(lo, hi);
      if (lo > t0) {
        t0 = lo;
        axis = a;
      }
      t1 = std::min(t1, hi);
    }
    if (miss || t0 >= t1 || t0 <= 0.0 || t0 >= hit.t) continue;
    const Vec3 q = o + t0 * d;
    const Vec3 u = q.cwiseQuotient(tracks_[k].size);  // unit-box coordinates
    const double shade = axis == 1 ? 1.0 : axis == 0 ? 0.85 : 0.7;
    const double tex = checker(4.0 * (u.x() + u.z()), 3.0 * u.y()) ? 1.0 : 0.8;
    const double band = (axis != 1 && u.y() > 0.15) ? 0.6 : 1.0;
    std::array<double, 3> rgb{};
    for (int c = 0; c < 3; ++c) rgb[c] = colors_[k][c] * shade * tex * band;
    hit = {t0, tracks_[k].id, rgb};
  }
  return hit;
}

SceneDataset SyntheticScene::build() const {
  SceneDataset scene;
  scene.name = "synthetic-seed" + std::to_string(cfg_.seed);
  scene.width = cfg_.width;
  scene.height = cfg_.height;
  scene.tracks = tracks_;
  const Camera cam = camera();
  std::mt19937_64 rng(cfg_.seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const std::size_t px = static_cast<std::size_t>(cfg_.width) * cfg_.height;

  for (int f = 0; f < cfg_.frames; ++f) {
    FrameData fd;
    fd.info.index = f;
    fd.info.pose = camera_pose(f);
    fd.info.camera = cam;
    fd.image = Image(cfg_.width, cfg_.height, 3);
    fd.sky.assign(px, 0);
    for (const auto& t : tracks_) fd.masks[t.id].assign(px, 0);
    for (int y = 0; y < cfg_.height; ++y) {
      for (int x = 0; x < cfg_.width; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * cfg_.width + x;
        const Vec3 d = (fd.info.pose.R * cam.unproject(x + 0.5, y + 0.5)).normalized();
        const TraceHit h = trace(fd.info.pose.t, d, f);
        for (int c = 0; c < 3; ++c) fd.image.data[i * 3 + c] = quantize8(h.rgb[c]);
        if (h.node == kFarFieldNode) {
          fd.sky[i] = 1;
          continue;
        }
        if (h.node >= 0) fd.masks[h.node][i] = 1;
        // One coin per non-sky pixel keeps the draw sequence independent of range.
        const bool take = coin(rng) < cfg_.lidar_fraction;
        if (take && h.t <= cfg_.lidar_range) {
          const Vec3 p = fd.info.pose.t + h.t * d;
          const Eigen::Vector3f stored = p.cast<float>();
          fd.lidar.push_back(stored.cast<double>());
        }
      }
    }
    scene.frames.push_back(std::move(fd));
  }
  scene.validate();
  return scene;
}

SceneDataset generate_synthetic(const SyntheticConfig& cfg) { return SyntheticScene(cfg).build(); }

void generate_synthetic(const SyntheticConfig& cfg, const std::filesystem::path& out) {
  write_scene(generate_synthetic(cfg), out);
  nlohmann::json j = cfg;
  std::ofstream(out / "synthetic.json") << j.dump(1) << "\n";
}

}  // namespace prosg::dataio
