// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "prosg/scenegraph/progressive.hpp"

#include "prosg/error.hpp"

#include <algorithm>
#include <cmath>

namespace prosg {

bool LocalGraph::has_frame(int frame) const { return std::find(frames.begin(), frames.end(), frame) != frames.end(); }

int ProgressiveState::active() const {
  for (std::size_t i = 0; i < graphs.size(); ++i)
    if (!graphs[i].frozen) return static_cast<int>(i);
  return -1;
}

void ProgressiveState::check_invariants() const {
  const auto unfrozen = std::count_if(graphs.begin(), graphs.end(), [](const LocalGraph& g) { return !g.frozen; });
  if (unfrozen > 1) throw ContractError(std::to_string(unfrozen) + " local graphs are unfrozen at once");
}

namespace {

LocalGraph spawn(const ProgressiveState& state, const SceneGraph& base, const Pose& camera) {
  LocalGraph g;
  g.graph = base;
  g.center = camera.t;
  g.radius = state.config.bound_radius;
  g.reference = camera;
  return g;
}

}  // namespace

std::vector<AllocationEvent> advance_window(ProgressiveState& state, int frame, const Pose& camera,
                                            const SceneGraph& base, const FreezeHook& on_freeze) {
  std::vector<AllocationEvent> events;
  int a = state.active();
  if (a < 0) {
    state.graphs.push_back(spawn(state, base, camera));
    a = static_cast<int>(state.graphs.size()) - 1;
    events.push_back({AllocationEvent::Kind::Spawn, a, {}});
  } else if ((camera.t - state.graphs[a].center).norm() > state.graphs[a].radius) {
    LocalGraph& old = state.graphs[a];
    const std::size_t keep = std::min<std::size_t>(std::max(state.config.overlap, 0), old.frames.size());
    std::vector<int> shared(old.frames.end() - static_cast<std::ptrdiff_t>(keep), old.frames.end());
    std::vector<int> released;
    for (int f : old.frames)
      if (std::find(shared.begin(), shared.end(), f) == shared.end()) released.push_back(f);
    old.frozen = true;
    if (on_freeze) old.checksum = on_freeze(a);
    events.push_back({AllocationEvent::Kind::Freeze, a, released});

    LocalGraph next = spawn(state, base, camera);
    next.frames = shared;
    state.graphs.push_back(std::move(next));
    a = static_cast<int>(state.graphs.size()) - 1;
    events.push_back({AllocationEvent::Kind::Spawn, a, shared});
  }
  LocalGraph& active = state.graphs[a];
  if (!active.has_frame(frame)) active.frames.push_back(frame);
  state.check_invariants();
  return events;
}

std::vector<int> covering_graphs(const ProgressiveState& state, int frame, const Vec3& camera_center) {
  std::vector<int> out;
  for (std::size_t i = 0; i < state.graphs.size(); ++i)
    if (state.graphs[i].has_frame(frame)) out.push_back(static_cast<int>(i));
  if (!out.empty()) return out;
  for (std::size_t i = 0; i < state.graphs.size(); ++i) {
    if ((camera_center - state.graphs[i].center).norm() <= state.graphs[i].radius) out.push_back(static_cast<int>(i));
  }
  if (out.empty()) {
    throw CoverageError("no local graph covers frame " + std::to_string(frame) + " at camera (" +
                        std::to_string(camera_center.x()) + ", " + std::to_string(camera_center.y()) + ", " +
                        std::to_string(camera_center.z()) + ")");
  }
  return out;
}

std::vector<double> idw_weights(const std::vector<Vec3>& centers, const Vec3& query, double power) {
  if (centers.empty()) throw InputError("IDW fusion needs at least one value");
  if (!(power > 0.0)) throw InputError("IDW power must be positive");
  std::vector<double> w(centers.size(), 0.0);
  for (std::size_t i = 0; i < centers.size(); ++i) {
    if ((query - centers[i]).norm() < 1e-9) {
      w[i] = 1.0;
      return w;
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    w[i] = std::pow((query - centers[i]).norm(), -power);
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

Eigen::VectorXd idw_fuse(const std::vector<std::pair<Eigen::VectorXd, Vec3>>& values, const Vec3& query,
                         double power) {
  std::vector<Vec3> centers;
  for (const auto& [v, c] : values) centers.push_back(c);
  const auto w = idw_weights(centers, query, power);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(values.front().first.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].first.size() != out.size()) throw InputError("IDW fusion values differ in size");
    if (w[i] != 0.0) out += w[i] * values[i].first;
  }
  return out;
}

}  // namespace prosg
