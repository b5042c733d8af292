// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "prosg/scenegraph/scene_graph.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace prosg::sampling {

/// Camera-frame depth (z) per pixel index (y * width + x).
using SparseDepth = std::map<std::int64_t, double>;

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 dir = Vec3::UnitZ();
  int frame = 0;
  int px = 0, py = 0;
  bool sky = false;
  /// Lidar range along the ray in metres, NaN when absent.
  double lidar = std::numeric_limits<double>::quiet_NaN();

  bool has_lidar() const { return lidar == lidar; }
};

enum class Mode { Eval, Train };

struct SamplingConfig {
  int N_s = 24;
  int N_d = 7;
  double d_near = 1.0;
  double d_far = 40.0;
  double parallel_eps = 1e-6;

  void validate() const;
};

struct Sample {
  double t = 0.0;
  double delta = 0.0;
  int node = kBackgroundNode;  ///< kBackgroundNode or an object id
  Vec3 x = Vec3::Zero();       ///< world point (background) or object-space point
  Vec3 dir = Vec3::UnitZ();    ///< world direction (background) or R^T d (objects)
};

struct SampleSet {
  std::vector<Sample> samples;
  /// Far-field contribution composited after the last sample.
  bool far_tail = true;

  std::size_t count(int node) const;
};

/// Which nodes take part in a render.
struct NodeMask {
  std::set<int> exclude;
  bool background = true;
  bool farfield = true;

  bool allows(int node) const;
};

/// Rays through pixel centres. Sky flags come from `sky` (row-major, nonzero = sky)
/// and lidar ranges from `lidar` when given.
std::vector<Ray> generate_rays(const Camera& camera, const Pose& camera_to_world, int frame,
                               const std::vector<std::pair<int, int>>& pixels,
                               const std::vector<std::uint8_t>* sky = nullptr, const SparseDepth* lidar = nullptr);

/// Distances to N_s planes parallel to the reference image plane, with plane
/// depths measured along the reference forward axis from the ray origin.
std::vector<double> plane_samples(const Ray& ray, const SamplingConfig& cfg, const Pose& reference, Mode mode,
                                  std::mt19937_64* rng = nullptr);

/// Slab intersection with [-0.5, 0.5]^3. The entrance is clamped to 0 when the
/// origin is inside. Misses, grazing contact and boxes behind the origin give nullopt.
std::optional<std::pair<double, double>> ray_box_intersect(const Vec3& origin, const Vec3& dir);

/// Eval: t_n = (n-1)/(N_d-1) (t_N - t_1) + t_1. Train: one uniform sample in
/// each of N_d equal sub-intervals. A degenerate interval yields its midpoint.
std::vector<double> box_stratified(double t_first, double t_last, int N_d, Mode mode = Mode::Eval,
                                   std::mt19937_64* rng = nullptr);

/// Plane samples merged with box samples of every intersected object posed at
/// the ray's frame, ascending in t with interval lengths filled in.
SampleSet gather_samples(const Ray& ray, const SceneGraph& graph, const Pose& reference, const SamplingConfig& cfg,
                         Mode mode = Mode::Eval, std::mt19937_64* rng = nullptr, const NodeMask& mask = {});

}  // namespace prosg::sampling
