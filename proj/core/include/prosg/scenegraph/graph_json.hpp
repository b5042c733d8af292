// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "prosg/scenegraph/progressive.hpp"

#include <json.hpp>

#include <string>

namespace prosg {

inline constexpr const char* kGraphSchema = "prosg-graph/1";

nlohmann::json pose_to_json(const Pose& pose);
/// Accepts a flat list of 12 numbers or a 3x4 nested list; throws InputError otherwise.
Pose pose_from_json(const nlohmann::json& j);

nlohmann::json graph_to_json(const SceneGraph& graph);
SceneGraph graph_from_json(const nlohmann::json& j);

/// Full export: schema tag, progressive settings and every local graph.
nlohmann::json state_to_json(const ProgressiveState& state, const std::string& checkpoint = "");
ProgressiveState state_from_json(const nlohmann::json& j);

}  // namespace prosg
