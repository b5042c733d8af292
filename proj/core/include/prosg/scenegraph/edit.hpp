// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "prosg/scenegraph/progressive.hpp"

#include <json.hpp>

#include <vector>

namespace prosg {

/// Applies an edit script {"ops": [{"op": "set_pose" | "insert" | "remove", ...}]}
/// to every local graph. The state is only modified when all ops succeed.
///
///   set_pose: node, pose, frame (all tracked frames when absent)
///   insert:   class, box [L, H, W], pose, frame (all camera frames when absent),
///             decoder_key (defaults to class), node (instance whose codes are copied;
///             defaults to the mean code of the decoder key)
///   remove:   node
///
/// Returns the ids of inserted nodes. Throws InputError for schema problems,
/// LookupError for unknown nodes, UnresolvedKeyError for unknown decoder keys
/// and ValidationError for invalid poses or boxes.
std::vector<int> apply_edit_script(ProgressiveState& state, const nlohmann::json& script);

}  // namespace prosg
