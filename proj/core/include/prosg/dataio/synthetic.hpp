// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "prosg/dataio/dataset.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>

namespace prosg::dataio {

/// Analytic driving scene: textured ground plane, checkered sky and up to
/// three textured boxes. The camera drives along +x at `camera_height` with a
/// slight lateral sway; world z is up.
struct SyntheticConfig {
  int width = 64;
  int height = 48;
  int frames = 20;
  int objects = 2;
  std::uint64_t seed = 0;
  double focal = 50.0;
  double camera_height = 1.6;
  double camera_speed = 0.5;   ///< metres per frame
  double pitch_deg = 5.0;      ///< downward tilt
  double lidar_fraction = 0.3; ///< share of non-sky pixels carrying a lidar return
  double lidar_range = 40.0;

  void validate() const;
};

void to_json(nlohmann::json& j, const SyntheticConfig& c);
void from_json(const nlohmann::json& j, SyntheticConfig& c);

struct TraceHit {
  double t = 0.0;          ///< distance along the unit direction, +inf for sky
  int node = -3;           ///< track id, kBackgroundNode for ground, kFarFieldNode for sky
  std::array<double, 3> rgb{};
};

/// Closed-form ray caster over the analytic scene, kept separate from the
/// neural renderer so it can serve as ground truth.
class SyntheticScene {
 public:
  explicit SyntheticScene(const SyntheticConfig& cfg);

  const SyntheticConfig& config() const { return cfg_; }
  Pose camera_pose(int frame) const;
  Camera camera() const;
  const std::vector<ObjectTrack>& tracks() const { return tracks_; }

  TraceHit trace(const Vec3& origin, const Vec3& dir, int frame) const;
  /// Full dataset with 8-bit quantised images and float32 lidar, matching what
  /// load_scene returns after write_scene.
  SceneDataset build() const;

 private:
  SyntheticConfig cfg_;
  std::vector<ObjectTrack> tracks_;
  std::vector<std::array<double, 3>> colors_;
};

SceneDataset generate_synthetic(const SyntheticConfig& cfg);
/// Writes the generated scene to `out` (created if needed).
void generate_synthetic(const SyntheticConfig& cfg, const std::filesystem::path& out);

}  // namespace prosg::dataio
