// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "prosg/scenegraph/pose.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace prosg {

/// Reserved node ids; object nodes use ids >= 0.
inline constexpr int kWorldNode = -1;
inline constexpr int kCameraNode = -2;
inline constexpr int kBackgroundNode = -3;
inline constexpr int kFarFieldNode = -4;

struct FrameInfo {
  int index = 0;
  Pose pose;  ///< camera-to-world
  Camera camera;
};

/// One tracked rigid object: box size (length, height, width) in metres and
/// its object-to-world pose per annotated frame.
struct ObjectTrack {
  int id = 0;
  std::string cls;
  Vec3 size = Vec3::Ones();
  std::map<int, Pose> poses;
};

struct LatentCodes {
  std::vector<double> shape;
  std::vector<double> appearance;
  bool operator==(const LatentCodes&) const = default;
};

struct ObjectNode {
  int id = 0;
  std::string cls;
  Vec3 size = Vec3::Ones();
  std::map<int, Pose> track;
  std::string decoder_key;
  LatentCodes codes;

  /// S_o = diag(1 / s_o).
  Mat3 scale() const { return size.cwiseInverse().asDiagonal(); }
  /// Throws LookupError when the node has no pose at `frame`.
  const Pose& pose_at(int frame) const;
};

struct Edge {
  int parent = kWorldNode;
  int child = kWorldNode;
  Pose transform;
  std::optional<Vec3> scale;
};

struct SceneGraph {
  Camera camera;
  std::map<int, Pose> camera_track;
  std::vector<ObjectNode> objects;
  /// Decoder keys present in the field registry.
  std::set<std::string> registry;

  const ObjectNode& node(int id) const;
  ObjectNode& node(int id);
  bool has_node(int id) const;

  /// Edges from W at `frame`: camera, background, far-field and every object
  /// posed at that frame (object edges carry the scale S_o).
  std::vector<Edge> edges(int frame) const;

  /// Checks poses, box sizes, tree structure and decoder-key resolution.
  void validate() const;
};

/// Box-scale factor applied to object tracks before graph construction.
std::vector<ObjectTrack> scale_boxes(std::vector<ObjectTrack> tracks, double factor);

SceneGraph build_scene_graph(const std::vector<FrameInfo>& frames, const std::vector<ObjectTrack>& tracks);

/// x_o = S_o T_o^w x.
Vec3 world_to_object(const Vec3& x, const ObjectNode& node, int frame);
Vec3 object_to_world(const Vec3& x_o, const ObjectNode& node, int frame);

void set_node_pose(SceneGraph& graph, int id, int frame, const Pose& pose);
/// Returns the new node id (one past the largest existing id).
int insert_node(SceneGraph& graph, const std::string& cls, const Vec3& size, const std::map<int, Pose>& track,
                const std::string& decoder_key, const LatentCodes& codes = {});
void remove_node(SceneGraph& graph, int id);

}  // namespace prosg
