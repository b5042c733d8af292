// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "prosg/rendering/model.hpp"

#include "prosg/error.hpp"
#include "prosg/numerics/checkpoint.hpp"
#include "prosg/scenegraph/graph_json.hpp"

#include <thread>

namespace prosg {

using rendering::RenderOutput;

fields::EncodingSchedule SceneModel::eval_schedule() const {
  fields::EncodingSchedule s;
  s.L_position = field.L_position;
  s.L_direction = field.L_direction;
  s.include_input = field.include_input;
  s.mask_enabled = false;
  return s;
}

void SceneModel::validate() const {
  if (fields.size() != state.graphs.size()) {
    throw ContractError("model has " + std::to_string(fields.size()) + " field sets for " +
                        std::to_string(state.graphs.size()) + " local graphs");
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    for (const auto& key : state.graphs[i].graph.registry) {
      if (!fields[i].decoders.count(key)) {
        throw UnresolvedKeyError("graph " + std::to_string(i) + " has no decoder for key '" + key + "'");
      }
    }
  }
}

namespace rendering {

void to_json(nlohmann::json& j, const RenderConfig& c) {
  j = {{"N_s", c.sampling.N_s},
       {"N_d", c.sampling.N_d},
       {"d_near", c.sampling.d_near},
       {"d_far", c.sampling.d_far},
       {"depth_mode", c.depth_mode == DepthMode::Distance ? "distance" : "interval"}};
}

void from_json(const nlohmann::json& j, RenderConfig& c) {
  RenderConfig d;
  c.sampling.N_s = j.value("N_s", d.sampling.N_s);
  c.sampling.N_d = j.value("N_d", d.sampling.N_d);
  c.sampling.d_near = j.value("d_near", d.sampling.d_near);
  c.sampling.d_far = j.value("d_far", d.sampling.d_far);
  const std::string mode = j.value("depth_mode", std::string("distance"));
  if (mode != "distance" && mode != "interval") throw ConfigError("depth_mode must be 'distance' or 'interval'");
  c.depth_mode = mode == "distance" ? DepthMode::Distance : DepthMode::Interval;
  c.sampling.validate();
}

}  // namespace rendering

namespace {

std::vector<Vec3> graph_centers(const SceneModel& m, const std::vector<int>& ids) {
  std::vector<Vec3> c;
  for (int g : ids) c.push_back(m.state.graphs[g].center);
  return c;
}

}  // namespace

RenderOutput render_pixel(const SceneModel& model, const sampling::Ray& ray, const sampling::NodeMask& mask) {
  const auto ids = covering_graphs(model.state, ray.frame, ray.origin);
  const auto sched = model.eval_schedule();
  std::vector<RenderOutput> parts;
  for (int g : ids) {
    parts.push_back(rendering::render_graph_rays({ray}, model.state.graphs[g], model.fields[g], model.field,
                                                 model.render, sched, mask)[0]);
  }
  if (parts.size() == 1) return parts[0];
  const auto w = idw_weights(graph_centers(model, ids), ray.origin, model.state.config.idw_power);
  RenderOutput out;
  out.T_end = 0.0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    for (int c = 0; c < 3; ++c) out.color[c] += w[i] * parts[i].color[c];
    out.depth += w[i] * parts[i].depth;
    out.T_end += w[i] * parts[i].T_end;
    for (const auto& [n, v] : parts[i].node_weight) out.node_weight[n] += w[i] * v;
    for (const auto& [n, v] : parts[i].node_color)
      for (int c = 0; c < 3; ++c) out.node_color[n][c] += w[i] * v[c];
  }
  return out;
}

RenderedImage render_image(const SceneModel& model, const Pose& c2w, const Camera& camera, int frame,
                           const RenderOptions& options) {
  camera.validate();
  const auto ids = covering_graphs(model.state, frame, c2w.t);
  const auto weights = idw_weights(graph_centers(model, ids), c2w.t, model.state.config.idw_power);
  const auto sched = model.eval_schedule();
  const int W = camera.width, H = camera.height;
  const std::size_t npx = static_cast<std::size_t>(W) * H;

  RenderedImage img;
  img.width = W;
  img.height = H;
  img.color.assign(3 * npx, 0.0f);
  img.depth.assign(npx, 0.0f);
  std::vector<double> color(3 * npx, 0.0), depth(npx, 0.0);
  std::map<int, std::vector<double>> layers;

  const int threads = std::max(1, std::min(options.threads, H));
  for (std::size_t gi = 0; gi < ids.size(); ++gi) {
    const int g = ids[gi];
    std::vector<RenderOutput> outputs(npx);
    auto work = [&](int row_begin, int row_end) {
      std::vector<std::pair<int, int>> pixels;
      for (int y = row_begin; y < row_end; ++y)
        for (int x = 0; x < W; ++x) pixels.emplace_back(x, y);
      auto rays = sampling::generate_rays(camera, c2w, frame, pixels);
      auto res = rendering::render_graph_rays(rays, model.state.graphs[g], model.fields[g], model.field, model.render,
                                              sched, options.mask);
      for (std::size_t i = 0; i < res.size(); ++i) {
        outputs[static_cast<std::size_t>(row_begin) * W + i] = std::move(res[i]);
      }
    };
    if (threads == 1) {
      work(0, H);
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < threads; ++t) pool.emplace_back(work, H * t / threads, H * (t + 1) / threads);
      for (auto& th : pool) th.join();
    }
    const double w = weights[gi];
    for (std::size_t p = 0; p < npx; ++p) {
      const auto& o = outputs[p];
      for (int c = 0; c < 3; ++c) color[3 * p + c] += w * o.color[c];
      depth[p] += w * o.depth;
      if (!options.layers) continue;
      for (const auto& [node, nw] : o.node_weight) {
        const int key = node == kFarFieldNode ? kBackgroundNode : node;
        auto& layer = layers[key];
        if (layer.empty()) layer.assign(4 * npx, 0.0);
        const auto& nc = o.node_color.at(node);
        for (int c = 0; c < 3; ++c) layer[4 * p + c] += w * nc[c];
        layer[4 * p + 3] += w * nw;
      }
    }
  }
  for (std::size_t i = 0; i < color.size(); ++i) img.color[i] = static_cast<float>(color[i]);
  for (std::size_t i = 0; i < depth.size(); ++i) img.depth[i] = static_cast<float>(depth[i]);
  for (auto& [node, layer] : layers) {
    auto& out = img.layers[node];
    out.resize(layer.size());
    for (std::size_t i = 0; i < layer.size(); ++i) out[i] = static_cast<float>(layer[i]);
  }
  return img;
}

void save_model(const SceneModel& model, const std::filesystem::path& path, const nlohmann::json& extra) {
  model.validate();
  nlohmann::json meta = extra.is_object() ? extra : nlohmann::json::object();
  meta["field"] = model.field;
  meta["render"] = model.render;
  meta["graph"] = state_to_json(model.state);
  std::vector<num::NamedParam<float>> named;
  for (std::size_t g = 0; g < model.fields.size(); ++g) {
    for (const auto* p : model.fields[g].params()) named.emplace_back("g" + std::to_string(g) + "/" + p->name, p);
  }
  num::write_checkpoint<float>(path, "prosg-model", named, meta);
}

SceneModel load_model(const std::filesystem::path& path) {
  const auto ckpt = num::read_checkpoint(path);
  if (ckpt.module != "prosg-model") throw LoadError("checkpoint " + path.string() + " is not a prosg model");
  SceneModel m;
  try {
    m.field = ckpt.meta.at("field").get<fields::FieldConfig>();
    m.render = ckpt.meta.at("render").get<rendering::RenderConfig>();
    m.state = state_from_json(ckpt.meta.at("graph"));
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("checkpoint " + path.string() + " has malformed metadata: " + e.what());
  }
  std::mt19937_64 rng(0);
  for (std::size_t g = 0; g < m.state.graphs.size(); ++g) {
    auto f = fields::make_graph_fields<float>(m.field, m.state.graphs[g].graph.registry, rng);
    num::restore_params(ckpt, f.params(), "g" + std::to_string(g) + "/");
    m.fields.push_back(std::move(f));
  }
  m.validate();
  return m;
}

}  // namespace prosg
