// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "prosg/fields/fields.hpp"
#include "prosg/rendering/renderer.hpp"
#include "prosg/scenegraph/progressive.hpp"
#include "prosg/training/train_config.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace prosg {

/// Everything a training run needs besides the data.
struct RunConfig {
  fields::FieldConfig field;
  rendering::RenderConfig render;
  ProgressiveConfig progressive;
  training::TrainConfig train;
};

void to_json(nlohmann::json& j, const ProgressiveConfig& c);
void from_json(const nlohmann::json& j, ProgressiveConfig& c);
void to_json(nlohmann::json& j, const RunConfig& c);
/// Throws ConfigError on wrong value types or invalid values.
void from_json(const nlohmann::json& j, RunConfig& c);

/// Merges `layer` into `base`. Every key in `layer` must already exist in
/// `base`; `source` names the layer in the error message.
nlohmann::json merge_layer(nlohmann::json base, const nlohmann::json& layer, const std::string& source);

/// Applies one "dotted.key=value" override. The value is parsed as JSON and
/// falls back to a plain string.
nlohmann::json apply_override(nlohmann::json base, const std::string& assignment);

/// Defaults, then the optional config file, then the overrides in order.
/// `resolved` receives the final JSON for printing.
RunConfig resolve_config(const std::optional<std::filesystem::path>& file, const std::vector<std::string>& overrides,
                         nlohmann::json* resolved = nullptr);

}  // namespace prosg
