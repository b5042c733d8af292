// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "prosg/rendering/renderer.hpp"

#include "prosg/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace prosg::rendering {

using num::Shape;
using num::Tape;
using num::Tensor;
using num::Var;

std::size_t PreparedBatch::pooled_rows() const {
  std::size_t n = bg_x.size();
  for (const auto& b : blocks) n += b.x.size();
  return n;
}

PreparedBatch prepare_batch(const std::vector<sampling::Ray>& rays, const LocalGraph& graph, const RenderConfig& cfg,
                            sampling::Mode mode, std::mt19937_64* rng, const sampling::NodeMask& mask) {
  PreparedBatch b;
  b.rays = rays.size();
  b.far = mask.farfield;
  std::vector<sampling::SampleSet> sets;
  sets.reserve(rays.size());
  std::map<std::string, std::size_t> block_of_key;
  std::map<int, std::int64_t> instance_row;
  for (const auto& r : rays) {
    sets.push_back(sampling::gather_samples(r, graph.graph, graph.reference, cfg.sampling, mode, rng, mask));
    b.slots = std::max(b.slots, sets.back().samples.size());
    b.dirs.push_back(r.dir);
  }
  for (const auto& set : sets) {
    for (const auto& s : set.samples) {
      if (s.node == kBackgroundNode || instance_row.count(s.node)) continue;
      instance_row[s.node] = static_cast<std::int64_t>(b.instances.size());
      b.instances.push_back(s.node);
      const std::string& key = graph.graph.node(s.node).decoder_key;
      if (!block_of_key.count(key)) {
        block_of_key[key] = b.blocks.size();
        b.blocks.push_back({key, {}, {}, {}});
      }
    }
  }
  // Pooled row indices are assigned per owner, then offset into the pool.
  const std::size_t total = b.rays * b.slots;
  b.t.assign(total, 0.0);
  b.delta.assign(total, 0.0);
  b.node.assign(total, kPaddingNode);
  b.source.assign(total, -1);
  std::vector<std::pair<std::size_t, std::size_t>> local(total, {SIZE_MAX, 0});  // (owner block or SIZE_MAX for bg, row)
  for (std::size_t r = 0; r < sets.size(); ++r) {
    const auto& samples = sets[r].samples;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& s = samples[i];
      const std::size_t k = r * b.slots + i;
      b.t[k] = s.t;
      b.delta[k] = s.delta;
      b.node[k] = s.node;
      if (s.node == kBackgroundNode) {
        local[k] = {SIZE_MAX, b.bg_x.size()};
        b.bg_x.push_back(s.x);
        b.bg_d.push_back(s.dir);
      } else {
        const std::size_t blk = block_of_key.at(graph.graph.node(s.node).decoder_key);
        auto& block = b.blocks[blk];
        local[k] = {blk, block.x.size()};
        block.x.push_back(s.x);
        block.d.push_back(s.dir);
        block.instance.push_back(instance_row.at(s.node));
      }
    }
  }
  std::vector<std::size_t> offset(b.blocks.size());
  std::size_t acc = b.bg_x.size();
  for (std::size_t i = 0; i < b.blocks.size(); ++i) {
    offset[i] = acc;
    acc += b.blocks[i].x.size();
  }
  for (std::size_t k = 0; k < total; ++k) {
    if (b.node[k] == kPaddingNode) continue;
    const auto [blk, row] = local[k];
    b.source[k] = static_cast<std::int64_t>(blk == SIZE_MAX ? row : offset[blk] + row);
  }
  return b;
}

template <typename T>
InstanceCodes<T> cached_codes(Tape<T>& tape, const PreparedBatch& batch, const SceneGraph& graph,
                              const fields::FieldConfig& cfg) {
  const std::size_t n = std::max<std::size_t>(batch.instances.size(), 1);
  Tensor<T> s(Shape{n, cfg.latent_shape}), a(Shape{n, cfg.latent_appearance});
  for (std::size_t i = 0; i < batch.instances.size(); ++i) {
    const auto& codes = graph.node(batch.instances[i]).codes;
    for (std::size_t k = 0; k < std::min(codes.shape.size(), cfg.latent_shape); ++k)
      s.at(i, k) = static_cast<T>(codes.shape[k]);
    for (std::size_t k = 0; k < std::min(codes.appearance.size(), cfg.latent_appearance); ++k)
      a.at(i, k) = static_cast<T>(codes.appearance[k]);
  }
  return {tape.constant(std::move(s)), tape.constant(std::move(a))};
}

namespace {

template <typename T>
Tensor<T> encode_points(const std::vector<Vec3>& pts, int L, bool include, const std::vector<double>& mask,
                        const Vec3& center, double scale) {
  const std::size_t dim = fields::encoded_dim(3, L, include);
  Tensor<T> out(Shape{pts.size(), dim});
  T* dst = out.data().data();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec3 x = (pts[i] - center) / scale;
    fields::encode3<T>(x.data(), L, include, mask, dst + i * dim);
  }
  return out;
}

template <typename T>
void require_finite(const Var<T>& v, const char* stage) {
  for (T x : v.value().data())
    if (!std::isfinite(x)) throw NumericError(std::string("non-finite values in ") + stage);
}

}  // namespace

template <typename T>
PooledFields<T> evaluate_fields(Tape<T>& tape, const PreparedBatch& batch, const fields::GraphFields<T>& f,
                                const fields::FieldConfig& cfg, const fields::EncodingSchedule& sched,
                                const Vec3& center, const InstanceCodes<T>& codes) {
  const auto pmask = sched.position_mask();
  const auto dmask = sched.direction_mask();
  std::vector<Var<T>> sigmas, rgbs;
  if (!batch.bg_x.empty()) {
    Var<T> ex = tape.constant(encode_points<T>(batch.bg_x, cfg.L_position, cfg.include_input, pmask, center,
                                               cfg.scene_scale));
    Var<T> ed = tape.constant(encode_points<T>(batch.bg_d, cfg.L_direction, cfg.include_input, dmask, Vec3::Zero(), 1.0));
    auto out = fields::background_forward(cfg, f.background, ex, ed);
    require_finite(out.sigma, "background density");
    require_finite(out.rgb, "background colour");
    sigmas.push_back(out.sigma);
    rgbs.push_back(out.rgb);
  }
  for (const auto& blk : batch.blocks) {
    auto it = f.decoders.find(blk.key);
    if (it == f.decoders.end()) throw UnresolvedKeyError("no decoder for key '" + blk.key + "'");
    Var<T> ex = tape.constant(encode_points<T>(blk.x, cfg.L_position, cfg.include_input, pmask, Vec3::Zero(), 1.0));
    Var<T> ed = tape.constant(encode_points<T>(blk.d, cfg.L_direction, cfg.include_input, dmask, Vec3::Zero(), 1.0));
    auto out = fields::object_forward(cfg, it->second, ex, ed, codes.shape, codes.appearance, blk.instance);
    require_finite(out.sigma, "object density");
    require_finite(out.rgb, "object colour");
    sigmas.push_back(out.sigma);
    rgbs.push_back(out.rgb);
  }
  PooledFields<T> pooled;
  if (sigmas.empty()) {
    pooled.sigma = tape.constant(Tensor<T>(Shape{1, 1}));
    pooled.rgb = tape.constant(Tensor<T>(Shape{1, 3}));
  } else {
    pooled.sigma = sigmas.size() == 1 ? sigmas[0] : num::concat_rows(sigmas);
    pooled.rgb = rgbs.size() == 1 ? rgbs[0] : num::concat_rows(rgbs);
  }
  if (batch.far) {
    pooled.far = fields::farfield_forward(cfg, f.far, batch.dirs, tape);
  } else {
    pooled.far = tape.constant(Tensor<T>(Shape{batch.rays, 3}));
  }
  return pooled;
}

template <typename T>
BatchRender<T> composite_batch(const PreparedBatch& batch, const PooledFields<T>& pooled, DepthMode mode) {
  Tape<T>& tape = *pooled.far.tape;
  const std::size_t R = batch.rays, S = std::max<std::size_t>(batch.slots, 1);
  const std::size_t total = R * S;
  std::vector<std::int64_t> source = batch.source;
  Tensor<T> delta(Shape{total, 1}), dist(Shape{R, S});
  if (batch.slots == 0) source.assign(total, -1);
  for (std::size_t k = 0; k < batch.t.size(); ++k) {
    delta[k] = static_cast<T>(batch.delta[k]);
    dist[k] = static_cast<T>(mode == DepthMode::Distance ? batch.t[k] : batch.delta[k]);
  }
  Tensor<T> upper(Shape{S, S});
  for (std::size_t k = 0; k < S; ++k)
    for (std::size_t i = k + 1; i < S; ++i) upper.at(k, i) = T(1);
  Tensor<T> select(Shape{3 * S, 3});
  for (std::size_t i = 0; i < S; ++i)
    for (std::size_t c = 0; c < 3; ++c) select.at(3 * i + c, c) = T(1);

  Var<T> sigma = num::gather_rows(pooled.sigma, source);
  Var<T> sd = num::reshape(num::mul(sigma, tape.constant(std::move(delta))), {R, S});
  Var<T> optical = num::matmul(sd, tape.constant(std::move(upper)));
  Var<T> trans = num::exp(num::neg(optical));
  Var<T> alpha = num::add_scalar(num::neg(num::exp(num::neg(sd))), T(1));
  BatchRender<T> out;
  out.weights = num::mul(trans, alpha);
  out.T_end = num::exp(num::neg(num::sum_cols(sd)));
  Var<T> rgb = num::gather_rows(pooled.rgb, source);
  Var<T> wc = num::mul(rgb, num::reshape(out.weights, {total, 1}));
  Var<T> color = num::matmul(num::reshape(wc, {R, 3 * S}), tape.constant(std::move(select)));
  out.color = num::add(color, num::mul(pooled.far, out.T_end));
  out.depth = num::sum_cols(num::mul(out.weights, tape.constant(std::move(dist))));
  return out;
}

namespace {

template <typename T>
std::vector<RenderOutput> render_rays_impl(const std::vector<sampling::Ray>& rays, const LocalGraph& graph,
                                           const fields::GraphFields<T>& f, const fields::FieldConfig& fcfg,
                                           const RenderConfig& cfg, const fields::EncodingSchedule& sched,
                                           const sampling::NodeMask& mask, std::size_t chunk) {
  std::vector<RenderOutput> out;
  out.reserve(rays.size());
  chunk = std::max<std::size_t>(chunk, 1);
  for (std::size_t begin = 0; begin < rays.size(); begin += chunk) {
    const std::size_t end = std::min(rays.size(), begin + chunk);
    const std::vector<sampling::Ray> part(rays.begin() + static_cast<std::ptrdiff_t>(begin),
                                          rays.begin() + static_cast<std::ptrdiff_t>(end));
    const PreparedBatch batch = prepare_batch(part, graph, cfg, sampling::Mode::Eval, nullptr, mask);
    Tape<T> tape(false);
    const auto codes = cached_codes(tape, batch, graph.graph, fcfg);
    const auto pooled = evaluate_fields(tape, batch, f, fcfg, sched, graph.center, codes);
    const auto& sig = pooled.sigma.value();
    const auto& rgb = pooled.rgb.value();
    const auto& far = pooled.far.value();
    for (std::size_t r = 0; r < batch.rays; ++r) {
      CompositeInput in;
      in.far_tail = batch.far;
      in.far = {far.at(r, 0), far.at(r, 1), far.at(r, 2)};
      for (std::size_t i = 0; i < batch.slots; ++i) {
        const std::size_t k = r * batch.slots + i;
        if (batch.node[k] == kPaddingNode) break;
        const auto row = static_cast<std::size_t>(batch.source[k]);
        in.t.push_back(batch.t[k]);
        in.delta.push_back(batch.delta[k]);
        in.sigma.push_back(static_cast<double>(sig[row]));
        in.rgb.push_back({rgb.at(row, 0), rgb.at(row, 1), rgb.at(row, 2)});
        in.node.push_back(batch.node[k]);
      }
      out.push_back(composite(in, cfg.depth_mode, kFarFieldNode));
    }
  }
  return out;
}

}  // namespace

std::vector<RenderOutput> render_graph_rays(const std::vector<sampling::Ray>& rays, const LocalGraph& graph,
                                            const fields::GraphFields<float>& f, const fields::FieldConfig& fcfg,
                                            const RenderConfig& cfg, const fields::EncodingSchedule& sched,
                                            const sampling::NodeMask& mask, std::size_t chunk) {
  return render_rays_impl(rays, graph, f, fcfg, cfg, sched, mask, chunk);
}

std::vector<RenderOutput> render_graph_rays(const std::vector<sampling::Ray>& rays, const LocalGraph& graph,
                                            const fields::GraphFields<double>& f, const fields::FieldConfig& fcfg,
                                            const RenderConfig& cfg, const fields::EncodingSchedule& sched,
                                            const sampling::NodeMask& mask, std::size_t chunk) {
  return render_rays_impl(rays, graph, f, fcfg, cfg, sched, mask, chunk);
}

#define PROSG_INSTANTIATE_RENDER(T)                                                                            \
  template InstanceCodes<T> cached_codes(Tape<T>&, const PreparedBatch&, const SceneGraph&,                  \
                                         const fields::FieldConfig&);                                        \
  template PooledFields<T> evaluate_fields(Tape<T>&, const PreparedBatch&, const fields::GraphFields<T>&,    \
                                           const fields::FieldConfig&, const fields::EncodingSchedule&,      \
                                           const Vec3&, const InstanceCodes<T>&);                            \
  template BatchRender<T> composite_batch(const PreparedBatch&, const PooledFields<T>&, DepthMode);

PROSG_INSTANTIATE_RENDER(float)
PROSG_INSTANTIATE_RENDER(double)

}  // namespace prosg::rendering
