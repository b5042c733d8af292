// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "prosg/sampling/sampling.hpp"

#include "prosg/error.hpp"

#include <algorithm>
#include <cmath>

namespace prosg::sampling {

void SamplingConfig::validate() const {
  if (N_s < 2) throw ConfigError("N_s must be >= 2");
  if (N_d < 2) throw ConfigError("N_d must be >= 2");
  if (!(d_near > 0.0) || !(d_far > d_near)) throw ConfigError("need 0 < d_near < d_far");
}

std::size_t SampleSet::count(int node) const {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [node](const Sample& s) { return s.node == node; }));
}

bool NodeMask::allows(int node) const {
  if (node == kBackgroundNode) return background;
  if (node == kFarFieldNode) return farfield;
  return !exclude.count(node);
}

std::vector<Ray> generate_rays(const Camera& camera, const Pose& c2w, int frame,
                               const std::vector<std::pair<int, int>>& pixels, const std::vector<std::uint8_t>* sky,
                               const SparseDepth* lidar) {
  camera.validate();
  std::vector<Ray> rays;
  rays.reserve(pixels.size());
  for (const auto& [x, y] : pixels) {
    const Vec3 dc = camera.unproject(x + 0.5, y + 0.5);
    Ray r;
    r.origin = c2w.t;
    r.dir = (c2w.R * dc).normalized();
    r.frame = frame;
    r.px = x;
    r.py = y;
    const std::int64_t idx = static_cast<std::int64_t>(y) * camera.width + x;
    if (sky && static_cast<std::size_t>(idx) < sky->size()) r.sky = (*sky)[idx] != 0;
    if (lidar) {
      auto it = lidar->find(idx);
      // z = t * (forward . d) for a point on this ray.
      if (it != lidar->end()) r.lidar = it->second * dc.norm();
    }
    rays.push_back(r);
  }
  return rays;
}

std::vector<double> plane_samples(const Ray& ray, const SamplingConfig& cfg, const Pose& reference, Mode mode,
                                  std::mt19937_64* rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double bin = (cfg.d_far - cfg.d_near) / cfg.N_s;
  const Vec3 forward = reference.R.col(2);
  const double cosine = forward.dot(ray.dir);
  std::vector<double> t(static_cast<std::size_t>(cfg.N_s));
  for (int k = 0; k < cfg.N_s; ++k) {
    const double jitter = (mode == Mode::Train && rng) ? u01(*rng) : 0.5;
    const double z = cfg.d_near + (k + jitter) * bin;
    t[k] = cosine > cfg.parallel_eps ? z / cosine : z;
  }
  return t;
}

std::optional<std::pair<double, double>> ray_box_intersect(const Vec3& o, const Vec3& d) {
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    if (d[i] == 0.0) {
      if (o[i] < -0.5 || o[i] > 0.5) return std::nullopt;
      continue;
    }
    const double inv = 1.0 / d[i];
    double a = (-0.5 - o[i]) * inv;
    double b = (0.5 - o[i]) * inv;
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
  }
  if (!(t1 > t0) || t1 <= 0.0) return std::nullopt;
  return std::make_pair(std::max(t0, 0.0), t1);
}

std::vector<double> box_stratified(double t_first, double t_last, int N_d, Mode mode, std::mt19937_64* rng) {
  if (N_d < 2) throw ContractError("box sampling needs N_d >= 2");
  if (!(t_last > t_first)) return {0.5 * (t_first + t_last)};
  std::vector<double> t(static_cast<std::size_t>(N_d));
  const double len = t_last - t_first;
  if (mode == Mode::Train && rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int n = 0; n < N_d; ++n) t[n] = t_first + (n + u01(*rng)) / N_d * len;
  } else {
    for (int n = 0; n < N_d; ++n) t[n] = static_cast<double>(n) / (N_d - 1) * len + t_first;
    t.back() = t_last;
  }
  return t;
}

SampleSet gather_samples(const Ray& ray, const SceneGraph& graph, const Pose& reference, const SamplingConfig& cfg,
                         Mode mode, std::mt19937_64* rng, const NodeMask& mask) {
  SampleSet set;
  set.far_tail = mask.farfield;
  auto& out = set.samples;
  if (mask.background) {
    for (double t : plane_samples(ray, cfg, reference, mode, rng)) {
      Sample s;
      s.t = t;
      s.node = kBackgroundNode;
      s.x = ray.origin + t * ray.dir;
      s.dir = ray.dir;
      out.push_back(s);
    }
  }
  for (const auto& node : graph.objects) {
    if (!mask.allows(node.id)) continue;
    auto pose_it = node.track.find(ray.frame);
    if (pose_it == node.track.end()) continue;
    const Pose& p = pose_it->second;
    const Mat3 S = node.scale();
    const Vec3 o_o = S * (p.R.transpose() * (ray.origin - p.t));
    const Vec3 d_o = S * (p.R.transpose() * ray.dir);
    const auto hit = ray_box_intersect(o_o, d_o);
    if (!hit) continue;
    const Vec3 dir_o = p.R.transpose() * ray.dir;
    for (double t : box_stratified(hit->first, hit->second, cfg.N_d, mode, rng)) {
      Sample s;
      s.t = t;
      s.node = node.id;
      s.x = o_o + t * d_o;
      s.dir = dir_o;
      out.push_back(s);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Sample& a, const Sample& b) { return a.t < b.t; });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (!(out[i].t > out[i - 1].t)) out[i].t = std::nextafter(out[i - 1].t, std::numeric_limits<double>::infinity());
  }
  const double last = (cfg.d_far - cfg.d_near) / cfg.N_s;
  for (std::size_t i = 0; i < out.size(); ++i) out[i].delta = i + 1 < out.size() ? out[i + 1].t - out[i].t : last;
  return set;
}

}  // namespace prosg::sampling
