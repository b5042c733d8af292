// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "prosg/sampling/sampling.hpp"

#include <vector>

namespace prosg::training {

/// Projects world points into a camera (camera-to-world pose) and returns the
/// camera-frame depth per pixel. Points at depth <= 0 or outside the image are
/// dropped; when several land on one pixel the nearest is kept.
sampling::SparseDepth project_lidar(const std::vector<Vec3>& points, const Pose& camera_to_world,
                                    const Camera& camera);

}  // namespace prosg::training
