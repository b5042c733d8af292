// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "prosg/scenegraph/scene_graph.hpp"

#include "prosg/error.hpp"

#include <algorithm>

namespace prosg {

const Pose& ObjectNode::pose_at(int frame) const {
  auto it = track.find(frame);
  if (it == track.end()) {
    throw LookupError("object node " + std::to_string(id) + " has no pose at frame " + std::to_string(frame));
  }
  return it->second;
}

const ObjectNode& SceneGraph::node(int id) const {
  for (const auto& n : objects)
    if (n.id == id) return n;
  throw LookupError("unknown node id " + std::to_string(id));
}

ObjectNode& SceneGraph::node(int id) {
  for (auto& n : objects)
    if (n.id == id) return n;
  throw LookupError("unknown node id " + std::to_string(id));
}

bool SceneGraph::has_node(int id) const {
  return std::any_of(objects.begin(), objects.end(), [id](const ObjectNode& n) { return n.id == id; });
}

std::vector<Edge> SceneGraph::edges(int frame) const {
  std::vector<Edge> out;
  auto cam = camera_track.find(frame);
  out.push_back({kWorldNode, kCameraNode, cam != camera_track.end() ? cam->second : Pose{}, std::nullopt});
  out.push_back({kWorldNode, kBackgroundNode, Pose{}, std::nullopt});
  out.push_back({kWorldNode, kFarFieldNode, Pose{}, std::nullopt});
  for (const auto& n : objects) {
    auto it = n.track.find(frame);
    if (it == n.track.end()) continue;
    out.push_back({kWorldNode, n.id, it->second, n.size.cwiseInverse()});
  }
  return out;
}

void SceneGraph::validate() const {
  std::set<int> ids;
  for (const auto& [f, p] : camera_track) p.validate();
  for (const auto& n : objects) {
    if (n.id < 0) throw ValidationError("object node ids must be non-negative, got " + std::to_string(n.id));
    if (!ids.insert(n.id).second) throw ValidationError("duplicate node id " + std::to_string(n.id));
    if (!(n.size.array() > 0.0).all()) throw ValidationError("node " + std::to_string(n.id) + " has a non-positive box size");
    if (n.track.empty()) throw InputError("node " + std::to_string(n.id) + " has no annotated frames");
    for (const auto& [f, p] : n.track) p.validate();
    if (!registry.count(n.decoder_key)) {
      throw UnresolvedKeyError("decoder key '" + n.decoder_key + "' of node " + std::to_string(n.id) +
                               " is not in the field registry");
    }
  }
}

std::vector<ObjectTrack> scale_boxes(std::vector<ObjectTrack> tracks, double factor) {
  if (!(factor > 0.0)) throw InputError("box scale factor must be positive");
  for (auto& t : tracks) t.size *= factor;
  return tracks;
}

SceneGraph build_scene_graph(const std::vector<FrameInfo>& frames, const std::vector<ObjectTrack>& tracks) {
  SceneGraph g;
  if (!frames.empty()) g.camera = frames.front().camera;
  for (const auto& f : frames) {
    f.pose.validate();
    g.camera_track[f.index] = f.pose;
  }
  for (const auto& t : tracks) {
    if (t.poses.empty()) throw InputError("track " + std::to_string(t.id) + " has no annotated frames");
    if (!(t.size.array() > 0.0).all()) throw InputError("track " + std::to_string(t.id) + " has a non-positive box size");
    for (const auto& [f, p] : t.poses) p.validate();
    ObjectNode n;
    n.id = t.id;
    n.cls = t.cls;
    n.size = t.size;
    n.track = t.poses;
    n.decoder_key = t.cls;
    g.registry.insert(n.decoder_key);
    g.objects.push_back(std::move(n));
  }
  g.validate();
  return g;
}

Vec3 world_to_object(const Vec3& x, const ObjectNode& node, int frame) {
  const Pose& p = node.pose_at(frame);
  return node.scale() * (p.R.transpose() * (x - p.t));
}

Vec3 object_to_world(const Vec3& x_o, const ObjectNode& node, int frame) {
  const Pose& p = node.pose_at(frame);
  return p.R * node.size.cwiseProduct(x_o) + p.t;
}

void set_node_pose(SceneGraph& graph, int id, int frame, const Pose& pose) {
  pose.validate();
  graph.node(id).track[frame] = pose;
}

int insert_node(SceneGraph& graph, const std::string& cls, const Vec3& size, const std::map<int, Pose>& track,
                const std::string& decoder_key, const LatentCodes& codes) {
  if (!graph.registry.count(decoder_key)) {
    throw UnresolvedKeyError("decoder key '" + decoder_key + "' is not in the field registry");
  }
  if (!(size.array() > 0.0).all()) throw ValidationError("inserted box size must be positive");
  if (track.empty()) throw InputError("inserted node needs at least one pose");
  for (const auto& [f, p] : track) p.validate();
  int id = 0;
  for (const auto& n : graph.objects) id = std::max(id, n.id + 1);
  ObjectNode n;
  n.id = id;
  n.cls = cls;
  n.size = size;
  n.track = track;
  n.decoder_key = decoder_key;
  n.codes = codes;
  graph.objects.push_back(std::move(n));
  return id;
}

void remove_node(SceneGraph& graph, int id) {
  auto it = std::find_if(graph.objects.begin(), graph.objects.end(), [id](const ObjectNode& n) { return n.id == id; });
  if (it == graph.objects.end()) throw LookupError("unknown node id " + std::to_string(id));
  graph.objects.erase(it);
}

}  // namespace prosg
