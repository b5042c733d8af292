// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "prosg/scenegraph/scene_graph.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace prosg {

struct ProgressiveConfig {
  double bound_radius = 30.0;  ///< metres
  int overlap = 10;            ///< frames shared by adjacent graphs
  double idw_power = 1.0;
};

struct LocalGraph {
  SceneGraph graph;
  Vec3 center = Vec3::Zero();
  double radius = 30.0;
  bool frozen = false;
  std::vector<int> frames;
  /// Camera pose at spawn; its image plane orients the plane samples.
  Pose reference;
  /// Parameter checksum recorded at freeze time.
  std::uint64_t checksum = 0;

  bool has_frame(int frame) const;
};

struct ProgressiveState {
  ProgressiveConfig config;
  std::vector<LocalGraph> graphs;

  /// Index of the unfrozen graph, or -1 when there is none.
  int active() const;
  /// Throws ContractError when more than one graph is unfrozen.
  void check_invariants() const;
};

struct AllocationEvent {
  enum class Kind { Spawn, Freeze };
  Kind kind = Kind::Spawn;
  int graph = 0;
  /// Spawn: frames shared with the previous graph. Freeze: frames released.
  std::vector<int> frames;

  bool operator==(const AllocationEvent&) const = default;
};

/// Called when a graph freezes; returns its parameter checksum.
using FreezeHook = std::function<std::uint64_t(int graph)>;

/// Assigns `frame` to the active graph, spawning and freezing graphs when the
/// camera leaves the active graph's bound. New graphs copy `base`.
std::vector<AllocationEvent> advance_window(ProgressiveState& state, int frame, const Pose& camera,
                                            const SceneGraph& base, const FreezeHook& on_freeze = {});

/// Graphs that cover a camera: those supervised by `frame`, otherwise those
/// whose bound contains the camera centre. Throws CoverageError when none do.
std::vector<int> covering_graphs(const ProgressiveState& state, int frame, const Vec3& camera_center);

/// Normalised inverse-distance weights d_i^-p / sum_j d_j^-p. A centre closer
/// than 1e-9 takes the full weight. Throws InputError on an empty list.
std::vector<double> idw_weights(const std::vector<Vec3>& centers, const Vec3& query, double power);

Eigen::VectorXd idw_fuse(const std::vector<std::pair<Eigen::VectorXd, Vec3>>& values, const Vec3& query, double power);

}  // namespace prosg
