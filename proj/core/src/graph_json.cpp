// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "prosg/scenegraph/graph_json.hpp"

#include "prosg/error.hpp"

#include <cstdio>

namespace prosg {

using nlohmann::json;

namespace {

json vec_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw InputError(std::string(what) + " must be a list of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json track_to_json(const std::map<int, Pose>& track) {
  json out = json::array();
  for (const auto& [f, p] : track) out.push_back({{"frame", f}, {"pose", pose_to_json(p)}});
  return out;
}

std::map<int, Pose> track_from_json(const json& j) {
  std::map<int, Pose> out;
  for (const auto& e : j) out[e.at("frame").get<int>()] = pose_from_json(e.at("pose"));
  return out;
}

std::string node_name(int id) {
  switch (id) {
    case kWorldNode:
      return "world";
    case kCameraNode:
      return "camera";
    case kBackgroundNode:
      return "background";
    case kFarFieldNode:
      return "farfield";
    default:
      return "object:" + std::to_string(id);
  }
}

}  // namespace

json pose_to_json(const Pose& pose) {
  json out = json::array();
  for (double v : pose.rows()) out.push_back(v);
  return out;
}

Pose pose_from_json(const json& j) {
  std::array<double, 12> rows{};
  if (j.is_array() && j.size() == 12) {
    for (int i = 0; i < 12; ++i) rows[i] = j[i].get<double>();
  } else if (j.is_array() && j.size() == 3 && j[0].is_array() && j[0].size() == 4) {
    for (int r = 0; r < 3; ++r) {
      if (!j[r].is_array() || j[r].size() != 4) throw InputError("pose rows must hold 4 numbers");
      for (int c = 0; c < 4; ++c) rows[r * 4 + c] = j[r][c].get<double>();
    }
  } else {
    throw InputError("pose must be 12 numbers (3x4 row-major)");
  }
  return Pose::from_rows(rows);
}

json graph_to_json(const SceneGraph& g) {
  json j;
  json k = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) k.push_back(g.camera.K(r, c));
  j["camera"] = {{"K", k}, {"width", g.camera.width}, {"height", g.camera.height}};
  j["camera_track"] = track_to_json(g.camera_track);
  j["registry"] = g.registry;

  json nodes = json::array();
  for (int id : {kWorldNode, kCameraNode, kBackgroundNode, kFarFieldNode}) {
    nodes.push_back({{"id", id}, {"name", node_name(id)}});
  }
  json edges = json::array();
  for (int id : {kCameraNode, kBackgroundNode, kFarFieldNode}) edges.push_back({{"parent", kWorldNode}, {"child", id}});
  json objects = json::array();
  for (const auto& n : g.objects) {
    nodes.push_back({{"id", n.id}, {"name", node_name(n.id)}});
    edges.push_back({{"parent", kWorldNode}, {"child", n.id}, {"scale", vec_to_json(n.size.cwiseInverse())}});
    objects.push_back({{"id", n.id},
                       {"class", n.cls},
                       {"size", vec_to_json(n.size)},
                       {"decoder_key", n.decoder_key},
                       {"track", track_to_json(n.track)},
                       {"codes", {{"shape", n.codes.shape}, {"appearance", n.codes.appearance}}}});
  }
  j["nodes"] = nodes;
  j["edges"] = edges;
  j["objects"] = objects;
  return j;
}

SceneGraph graph_from_json(const json& j) {
  SceneGraph g;
  try {
    const auto& cam = j.at("camera");
    const auto k = cam.at("K").get<std::vector<double>>();
    if (k.size() != 9) throw InputError("camera K must hold 9 numbers");
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) g.camera.K(r, c) = k[r * 3 + c];
    g.camera.width = cam.at("width").get<int>();
    g.camera.height = cam.at("height").get<int>();
    g.camera_track = track_from_json(j.at("camera_track"));
    g.registry = j.at("registry").get<std::set<std::string>>();
    for (const auto& o : j.at("objects")) {
      ObjectNode n;
      n.id = o.at("id").get<int>();
      n.cls = o.at("class").get<std::string>();
      n.size = vec_from_json(o.at("size"), "object size");
      n.decoder_key = o.at("decoder_key").get<std::string>();
      n.track = track_from_json(o.at("track"));
      if (o.contains("codes")) {
        n.codes.shape = o["codes"].value("shape", std::vector<double>{});
        n.codes.appearance = o["codes"].value("appearance", std::vector<double>{});
      }
      g.objects.push_back(std::move(n));
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed scene graph JSON: ") + e.what());
  }
  g.validate();
  return g;
}

json state_to_json(const ProgressiveState& state, const std::string& checkpoint) {
  json j;
  j["schema"] = kGraphSchema;
  if (!checkpoint.empty()) j["checkpoint"] = checkpoint;
  j["progressive"] = {{"bound_radius", state.config.bound_radius},
                      {"overlap", state.config.overlap},
                      {"idw_power", state.config.idw_power}};
  json graphs = json::array();
  for (std::size_t i = 0; i < state.graphs.size(); ++i) {
    const LocalGraph& lg = state.graphs[i];
    char sum[17];
    std::snprintf(sum, sizeof(sum), "%016llx", static_cast<unsigned long long>(lg.checksum));
    graphs.push_back({{"index", i},
                      {"center", vec_to_json(lg.center)},
                      {"radius", lg.radius},
                      {"frozen", lg.frozen},
                      {"frames", lg.frames},
                      {"reference", pose_to_json(lg.reference)},
                      {"checksum", sum},
                      {"graph", graph_to_json(lg.graph)}});
  }
  j["graphs"] = graphs;
  return j;
}

ProgressiveState state_from_json(const json& j) {
  ProgressiveState state;
  try {
    if (j.value("schema", std::string{}) != kGraphSchema) {
      throw InputError("scene graph document must declare schema '" + std::string(kGraphSchema) + "'");
    }
    const auto& p = j.at("progressive");
    state.config.bound_radius = p.at("bound_radius").get<double>();
    state.config.overlap = p.at("overlap").get<int>();
    state.config.idw_power = p.at("idw_power").get<double>();
    for (const auto& gj : j.at("graphs")) {
      LocalGraph lg;
      lg.center = vec_from_json(gj.at("center"), "graph center");
      lg.radius = gj.at("radius").get<double>();
      lg.frozen = gj.at("frozen").get<bool>();
      lg.frames = gj.at("frames").get<std::vector<int>>();
      lg.reference = pose_from_json(gj.at("reference"));
      lg.checksum = std::stoull(gj.at("checksum").get<std::string>(), nullptr, 16);
      lg.graph = graph_from_json(gj.at("graph"));
      state.graphs.push_back(std::move(lg));
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed scene graph JSON: ") + e.what());
  }
  state.check_invariants();
  return state;
}

}  // namespace prosg
