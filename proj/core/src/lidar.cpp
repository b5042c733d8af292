// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "prosg/training/lidar.hpp"

#include <cmath>

namespace prosg::training {

sampling::SparseDepth project_lidar(const std::vector<Vec3>& points, const Pose& camera_to_world,
                                    const Camera& camera) {
  camera.validate();
  const Pose w2c = camera_to_world.inverse();
  sampling::SparseDepth out;
  for (const Vec3& p : points) {
    const Vec3 c = w2c.apply(p);
    if (!(c.z() > 0.0)) continue;
    const Vec3 uv = camera.K * (c / c.z());
    const double u = std::floor(uv.x()), v = std::floor(uv.y());
    if (u < 0 || v < 0 || u >= camera.width || v >= camera.height) continue;
    const auto idx = static_cast<std::int64_t>(v) * camera.width + static_cast<std::int64_t>(u);
    auto it = out.find(idx);
    if (it == out.end() || c.z() < it->second) out[idx] = c.z();
  }
  return out;
}

}  // namespace prosg::training
