// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "prosg/fields/fields.hpp"
#include "prosg/rendering/renderer.hpp"
#include "prosg/scenegraph/progressive.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <vector>

namespace prosg {

/// Progressive state plus the trained fields of every local graph.
struct SceneModel {
  fields::FieldConfig field;
  rendering::RenderConfig render;
  ProgressiveState state;
  std::vector<fields::GraphFields<float>> fields;

  /// Schedule used for evaluation renders (mask fully open).
  fields::EncodingSchedule eval_schedule() const;
  /// Throws ContractError when fields and graphs disagree.
  void validate() const;
};

struct RenderOptions {
  sampling::NodeMask mask;
  bool layers = false;
  int threads = 1;
};

/// Colour (3 per pixel), depth, and optional decomposition layers: premultiplied
/// RGB plus alpha (4 per pixel) keyed by node id. The background layer
/// includes the far-field so the layers sum to the full render.
struct RenderedImage {
  int width = 0;
  int height = 0;
  std::vector<float> color;
  std::vector<float> depth;
  std::map<int, std::vector<float>> layers;
};

/// Renders one ray with IDW fusion over the graphs covering its frame.
rendering::RenderOutput render_pixel(const SceneModel& model, const sampling::Ray& ray,
                                     const sampling::NodeMask& mask = {});

RenderedImage render_image(const SceneModel& model, const Pose& camera_to_world, const Camera& camera, int frame,
                           const RenderOptions& options = {});

void save_model(const SceneModel& model, const std::filesystem::path& path, const nlohmann::json& extra = {});
SceneModel load_model(const std::filesystem::path& path);

}  // namespace prosg
