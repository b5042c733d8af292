// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "prosg/scenegraph/edit.hpp"

#include "prosg/error.hpp"
#include "prosg/scenegraph/graph_json.hpp"

namespace prosg {

using nlohmann::json;

namespace {

LatentCodes mean_codes(const SceneGraph& g, const std::string& key) {
  LatentCodes out;
  int n = 0;
  for (const auto& node : g.objects) {
    if (node.decoder_key != key || node.codes.shape.empty()) continue;
    if (out.shape.empty()) {
      out.shape.assign(node.codes.shape.size(), 0.0);
      out.appearance.assign(node.codes.appearance.size(), 0.0);
    }
    for (std::size_t i = 0; i < out.shape.size(); ++i) out.shape[i] += node.codes.shape[i];
    for (std::size_t i = 0; i < out.appearance.size(); ++i) out.appearance[i] += node.codes.appearance[i];
    ++n;
  }
  for (double& v : out.shape) v /= n;
  for (double& v : out.appearance) v /= n;
  return out;
}

int node_of(const json& op) {
  if (!op.contains("node") || !op["node"].is_number_integer()) throw InputError("edit op needs an integer 'node'");
  return op["node"].get<int>();
}

void apply_one(SceneGraph& g, const json& op, std::vector<int>& inserted) {
  const std::string kind = op.at("op").get<std::string>();
  if (kind == "set_pose") {
    const int id = node_of(op);
    if (!op.contains("pose")) throw InputError("set_pose needs 'pose'");
    const Pose pose = pose_from_json(op["pose"]);
    pose.validate();
    if (op.contains("frame")) {
      set_node_pose(g, id, op["frame"].get<int>(), pose);
    } else {
      auto& node = g.node(id);
      for (auto& [f, p] : node.track) p = pose;
    }
  } else if (kind == "insert") {
    if (!op.contains("class") || !op.contains("box") || !op.contains("pose")) {
      throw InputError("insert needs 'class', 'box' and 'pose'");
    }
    const std::string cls = op["class"].get<std::string>();
    const std::string key = op.value("decoder_key", cls);
    const auto box = op["box"].get<std::vector<double>>();
    if (box.size() != 3) throw InputError("insert 'box' must hold 3 sizes");
    const Pose pose = pose_from_json(op["pose"]);
    pose.validate();
    if (!g.registry.count(key)) throw UnresolvedKeyError("decoder key '" + key + "' is not in the field registry");
    std::map<int, Pose> track;
    if (op.contains("frame")) {
      track[op["frame"].get<int>()] = pose;
    } else {
      for (const auto& [f, p] : g.camera_track) track[f] = pose;
    }
    LatentCodes codes = op.contains("node") ? g.node(node_of(op)).codes : mean_codes(g, key);
    inserted.push_back(insert_node(g, cls, Vec3(box[0], box[1], box[2]), track, key, codes));
  } else if (kind == "remove") {
    remove_node(g, node_of(op));
  } else {
    throw InputError("unknown edit op '" + kind + "'");
  }
}

}  // namespace

std::vector<int> apply_edit_script(ProgressiveState& state, const json& script) {
  if (!script.is_object() || !script.contains("ops") || !script["ops"].is_array()) {
    throw InputError("edit script must be an object with an 'ops' list");
  }
  ProgressiveState next = state;
  std::vector<int> inserted;
  try {
    for (const auto& op : script["ops"]) {
      if (!op.is_object() || !op.contains("op") || !op["op"].is_string()) throw InputError("edit op needs a string 'op'");
      std::vector<int> ids;
      for (auto& lg : next.graphs) {
        ids.clear();
        apply_one(lg.graph, op, ids);
      }
      inserted.insert(inserted.end(), ids.begin(), ids.end());
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed edit op: ") + e.what());
  }
  state = std::move(next);
  return inserted;
}

}  // namespace prosg
