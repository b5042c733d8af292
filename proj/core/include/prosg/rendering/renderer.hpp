// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "prosg/fields/fields.hpp"
#include "prosg/rendering/composite.hpp"
#include "prosg/sampling/sampling.hpp"
#include "prosg/scenegraph/progressive.hpp"

#include <json.hpp>

#include <climits>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace prosg::rendering {

struct RenderConfig {
  sampling::SamplingConfig sampling;
  DepthMode depth_mode = DepthMode::Distance;
};

void to_json(nlohmann::json& j, const RenderConfig& c);
void from_json(const nlohmann::json& j, RenderConfig& c);

inline constexpr int kPaddingNode = INT_MIN;

/// Samples of a ray batch laid out on a padded (rays x slots) grid, plus the
/// field inputs pooled by owner: background rows first, then one block per
/// decoder key.
struct PreparedBatch {
  struct KeyBlock {
    std::string key;
    std::vector<Vec3> x;                  ///< object-space points
    std::vector<Vec3> d;                  ///< object-space directions
    std::vector<std::int64_t> instance;   ///< row into the instance list
  };

  std::size_t rays = 0;
  std::size_t slots = 0;
  std::vector<double> t, delta;          ///< rays * slots, zero in padding
  std::vector<int> node;                 ///< owner per slot, kPaddingNode in padding
  std::vector<std::int64_t> source;      ///< pooled row per slot, -1 in padding
  std::vector<Vec3> bg_x, bg_d;
  std::vector<KeyBlock> blocks;
  std::vector<Vec3> dirs;                ///< world direction per ray
  bool far = true;
  /// Object node ids in latent-row order.
  std::vector<int> instances;

  std::size_t pooled_rows() const;
};

PreparedBatch prepare_batch(const std::vector<sampling::Ray>& rays, const LocalGraph& graph, const RenderConfig& cfg,
                            sampling::Mode mode = sampling::Mode::Eval, std::mt19937_64* rng = nullptr,
                            const sampling::NodeMask& mask = {});

/// Field values for the pooled rows of a batch.
template <typename T>
struct PooledFields {
  num::Var<T> sigma;  ///< (rows, 1)
  num::Var<T> rgb;    ///< (rows, 3)
  num::Var<T> far;    ///< (rays, 3)
};

/// Codes per batch instance: (instances, d_s) and (instances, d_a).
template <typename T>
struct InstanceCodes {
  num::Var<T> shape;
  num::Var<T> appearance;
};

/// Cached node codes as constants (zeros for nodes without codes).
template <typename T>
InstanceCodes<T> cached_codes(num::Tape<T>& tape, const PreparedBatch& batch, const SceneGraph& graph,
                              const fields::FieldConfig& cfg);

template <typename T>
PooledFields<T> evaluate_fields(num::Tape<T>& tape, const PreparedBatch& batch, const fields::GraphFields<T>& f,
                                const fields::FieldConfig& cfg, const fields::EncodingSchedule& sched,
                                const Vec3& center, const InstanceCodes<T>& codes);

template <typename T>
struct BatchRender {
  num::Var<T> color;    ///< (rays, 3)
  num::Var<T> depth;    ///< (rays, 1)
  num::Var<T> weights;  ///< (rays, slots)
  num::Var<T> T_end;    ///< (rays, 1)
};

/// Differentiable alpha compositing over the padded grid.
template <typename T>
BatchRender<T> composite_batch(const PreparedBatch& batch, const PooledFields<T>& pooled, DepthMode mode);

/// Evaluation render of rays against one local graph: fields on a no-grad
/// tape, then per-ray compositing in double precision.
std::vector<RenderOutput> render_graph_rays(const std::vector<sampling::Ray>& rays, const LocalGraph& graph,
                                            const fields::GraphFields<float>& f, const fields::FieldConfig& fcfg,
                                            const RenderConfig& cfg, const fields::EncodingSchedule& sched,
                                            const sampling::NodeMask& mask = {}, std::size_t chunk = 2048);

/// Same as render_graph_rays for 64-bit fields (used by the test oracles).
std::vector<RenderOutput> render_graph_rays(const std::vector<sampling::Ray>& rays, const LocalGraph& graph,
                                            const fields::GraphFields<double>& f, const fields::FieldConfig& fcfg,
                                            const RenderConfig& cfg, const fields::EncodingSchedule& sched,
                                            const sampling::NodeMask& mask = {}, std::size_t chunk = 2048);

}  // namespace prosg::rendering
