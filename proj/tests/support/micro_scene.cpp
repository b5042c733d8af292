// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "micro_scene.hpp"

#include <limits>
#include <random>

namespace prosg::testing {

fields::FieldConfig tiny_field_config() {
  fields::FieldConfig c;
  c.L_position = 3;
  c.L_direction = 2;
  c.bg_hidden = 8;
  c.bg_layers = 2;
  c.bg_feature = 4;
  c.bg_color_hidden = 8;
  c.obj_hidden = 8;
  c.obj_blocks = 1;
  c.latent_shape = 4;
  c.latent_appearance = 4;
  c.crop = 8;
  c.enc_channels = {3, 4};
  c.env_height = 4;
  c.env_width = 8;
  c.hidden_activation = num::Activation::Softplus;
  c.scene_scale = 10.0;
  return c;
}

MicroScene make_micro_scene(std::uint64_t seed) {
  MicroScene s;
  s.field = tiny_field_config();
  s.render.sampling.N_s = 8;
  s.render.sampling.N_d = 3;
  s.render.sampling.d_near = 1.0;
  s.render.sampling.d_far = 20.0;
  s.train.weights = {1.0, 1.0, 1.0, 1.0};
  s.train.iterations = 100;
  s.sched.L_position = s.field.L_position;
  s.sched.L_direction = s.field.L_direction;
  s.sched.t = 12.0;
  s.sched.T = 30.0;

  Camera cam;
  cam.width = 8;
  cam.height = 8;
  cam.K << 10.0, 0.0, 4.0, 0.0, 10.0, 4.0, 0.0, 0.0, 1.0;
  FrameInfo frame{0, Pose{}, cam};
  ObjectTrack track;
  track.id = 0;
  track.cls = "car";
  track.size = Vec3(2.0, 2.0, 2.0);
  Pose box;
  box.t = Vec3(0.0, 0.0, 6.0);
  track.poses[0] = box;
  s.graph.graph = build_scene_graph({frame}, {track});
  s.graph.frames = {0};
  s.graph.radius = 30.0;

  std::mt19937_64 rng(seed);
  s.fields = fields::make_graph_fields<double>(s.field, s.graph.graph.registry, rng);
  // Non-zero far-field logits so the environment lookup carries signal.
  std::normal_distribution<double> n01(0.0, 0.5);
  for (auto& v : s.fields.far.logits.value.data()) v = n01(rng);
  // Thin out the initial densities so every ray keeps some transmittance to the far field.
  for (auto* p : s.fields.params()) {
    if (p->name == "bg.stage1.l2.bias") p->value[0] = -4.0;
    if (p->name == "obj.car.sigma_head.bias") p->value[0] = -1.0;
  }

  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int k = 0; k < 2; ++k) {
    std::vector<float> crop(s.field.crop * s.field.crop * 3);
    for (auto& v : crop) v = static_cast<float>(u01(rng));
    s.crops[0].push_back(std::move(crop));
  }

  auto ray = [](Vec3 d, bool sky, double lidar) {
    sampling::Ray r;
    r.dir = d.normalized();
    r.sky = sky;
    r.lidar = lidar;
    return r;
  };
  const double none = std::numeric_limits<double>::quiet_NaN();
  s.rays = {ray({0.0, 0.0, 1.0}, false, 5.2), ray({0.5, 0.3, 1.0}, false, 9.0), ray({0.0, -1.0, 0.3}, true, none),
            ray({0.12, 0.05, 1.0}, false, none)};
  for (std::size_t i = 0; i < s.rays.size(); ++i) {
    s.rays[i].px = static_cast<int>(i);
    s.targets.push_back({u01(rng), u01(rng), u01(rng)});
  }
  return s;
}

num::Var<double> micro_loss(num::Tape<double>& tape, const MicroScene& s) {
  const auto batch = rendering::prepare_batch(s.rays, s.graph, s.render, sampling::Mode::Eval);
  const auto codes = training::encoder_codes(tape, batch, s.graph.graph, s.fields, s.field, s.crops, 8, nullptr);
  const auto pooled = rendering::evaluate_fields(tape, batch, s.fields, s.field, s.sched, s.graph.center, codes);
  const auto render = rendering::composite_batch(batch, pooled, s.render.depth_mode);
  return training::loss_terms(batch, render, s.rays, s.targets, s.train).total;
}

SceneModel micro_model(const MicroScene& s) {
  SceneModel m;
  m.field = s.field;
  m.render = s.render;
  m.state.graphs.push_back(s.graph);
  m.fields.push_back(s.fields.cast<float>());
  return m;
}

}  // namespace prosg::testing
