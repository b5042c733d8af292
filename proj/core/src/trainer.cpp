// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "prosg/training/trainer.hpp"

#include "prosg/dataio/metrics.hpp"
#include "prosg/dataio/split.hpp"
#include "prosg/error.hpp"
#include "prosg/numerics/checkpoint.hpp"
#include "prosg/training/lidar.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace prosg::training {

using num::Shape;
using num::Tape;
using num::Tensor;
using num::Var;
using rendering::PreparedBatch;

CropBank build_crop_bank(const dataio::SceneDataset& data, const std::vector<int>& frames, std::size_t crop) {
  CropBank bank;
  for (int f : frames) {
    const auto& fd = data.frame(f);
    for (const auto& [id, mask] : fd.masks) {
      (void)mask;
      if (dataio::has_instance(fd, id)) bank[id].push_back(dataio::instance_crop(fd, id, crop));
    }
  }
  return bank;
}

template <typename T>
rendering::InstanceCodes<T> encoder_codes(Tape<T>& tape, const PreparedBatch& batch, const SceneGraph& graph,
                                          const fields::GraphFields<T>& f, const fields::FieldConfig& cfg,
                                          const CropBank& crops, int max_crops, std::mt19937_64* rng) {
  const auto cached = rendering::cached_codes(tape, batch, graph, cfg);
  std::vector<std::size_t> encoded;  // batch instance rows with crops
  std::vector<std::vector<std::size_t>> groups;
  std::vector<const std::vector<float>*> chosen;
  for (std::size_t i = 0; i < batch.instances.size(); ++i) {
    const auto it = crops.find(batch.instances[i]);
    if (it == crops.end() || it->second.empty()) continue;
    std::vector<std::size_t> pick(it->second.size());
    for (std::size_t k = 0; k < pick.size(); ++k) pick[k] = k;
    const std::size_t n = std::min<std::size_t>(pick.size(), static_cast<std::size_t>(max_crops));
    if (rng != nullptr && n < pick.size()) {
      for (std::size_t k = 0; k < n; ++k) {
        std::uniform_int_distribution<std::size_t> d(k, pick.size() - 1);
        std::swap(pick[k], pick[d(*rng)]);
      }
    }
    std::vector<std::size_t> group;
    for (std::size_t k = 0; k < n; ++k) {
      group.push_back(chosen.size());
      chosen.push_back(&it->second[pick[k]]);
    }
    groups.push_back(std::move(group));
    encoded.push_back(i);
  }
  if (encoded.empty()) return cached;

  const std::size_t width = cfg.crop * cfg.crop * 3;
  Tensor<T> stack(Shape{chosen.size(), width});
  for (std::size_t r = 0; r < chosen.size(); ++r) {
    if (chosen[r]->size() != width) throw ShapeError("crop bank entry does not match the encoder crop size");
    for (std::size_t k = 0; k < width; ++k) stack.at(r, k) = static_cast<T>((*chosen[r])[k]);
  }
  auto [cs, ca] = fields::encoder_forward(cfg, f.encoder, tape.constant(std::move(stack)), groups);
  if (encoded.size() == batch.instances.size()) return {cs, ca};

  // Encoded rows first, then cached rows, permuted back into batch order.
  std::vector<std::int64_t> order(batch.instances.size());
  std::size_t e = 0;
  for (std::size_t i = 0; i < batch.instances.size(); ++i) {
    if (e < encoded.size() && encoded[e] == i) {
      order[i] = static_cast<std::int64_t>(e++);
    } else {
      order[i] = static_cast<std::int64_t>(encoded.size() + i);
    }
  }
  Var<T> all_s = num::concat_rows(std::vector<Var<T>>{cs, cached.shape});
  Var<T> all_a = num::concat_rows(std::vector<Var<T>>{ca, cached.appearance});
  return {num::gather_rows(all_s, order), num::gather_rows(all_a, order)};
}

template <typename T>
LossTerms<T> loss_terms(const PreparedBatch& batch, const rendering::BatchRender<T>& render,
                        const std::vector<sampling::Ray>& rays, const std::vector<rendering::Rgb>& targets,
                        const TrainConfig& cfg) {
  Tape<T>& tape = *render.color.tape;
  const std::size_t R = rays.size();
  if (targets.size() != R || batch.rays != R) throw ShapeError("loss inputs disagree on the batch size");
  std::vector<double> lidar(R);
  std::vector<bool> sky(R);
  for (std::size_t i = 0; i < R; ++i) {
    lidar[i] = rays[i].lidar;
    sky[i] = rays[i].sky;
  }
  std::vector<std::uint8_t> valid(batch.node.size());
  for (std::size_t k = 0; k < valid.size(); ++k) valid[k] = batch.node[k] != rendering::kPaddingNode;
  // composite_batch pads an empty grid to one slot per ray.
  const std::size_t S = std::max<std::size_t>(batch.slots, 1);
  std::vector<double> t = batch.t, delta = batch.delta;
  if (batch.slots == 0) {
    t.assign(R * S, 0.0);
    delta.assign(R * S, 0.0);
    valid.assign(R * S, 0);
  }

  const auto& w = cfg.weights;
  LossTerms<T> out;
  std::vector<Var<T>> parts;
  if (w.color > 0.0) {
    Tensor<T> target(Shape{R, 3});
    for (std::size_t i = 0; i < R; ++i)
      for (int c = 0; c < 3; ++c) target.at(i, c) = static_cast<T>(targets[i][c]);
    out.color = color_loss(render.color, target);
    parts.push_back(num::scale(*out.color, static_cast<T>(w.color)));
  }
  if (w.depth > 0.0) {
    out.depth = depth_loss(render.depth, lidar);
    parts.push_back(num::scale(*out.depth, static_cast<T>(w.depth)));
  }
  if (w.sigma > 0.0) {
    out.sigma = ray_distribution_loss(render.weights, t, delta, valid, lidar, cfg.depth_variance, cfg.sigma_sign);
    parts.push_back(num::scale(*out.sigma, static_cast<T>(w.sigma)));
  }
  if (w.seg > 0.0) {
    out.seg = sky_loss(render.weights, delta, valid, sky);
    parts.push_back(num::scale(*out.seg, static_cast<T>(w.seg)));
  }
  if (parts.empty()) {
    out.total = tape.constant(Tensor<T>(Shape{1, 1}));
  } else {
    out.total = parts[0];
    for (std::size_t i = 1; i < parts.size(); ++i) out.total = num::add(out.total, parts[i]);
  }
  return out;
}

nlohmann::json StepRecord::to_json() const {
  nlohmann::json j = {{"iter", iter},       {"L_c", L_c},
                      {"L_d", L_d},         {"L_sigma", L_sigma},
                      {"L_seg", L_seg},     {"total", total},
                      {"active_graph", active_graph}, {"frozen_count", frozen_count}};
  if (psnr) j["psnr"] = *psnr;
  if (aborted) {
    j["aborted"] = true;
    j["diagnostic"] = diagnostic;
  }
  return j;
}

EvalReport evaluate_frames(const SceneModel& model, const dataio::SceneDataset& data, const std::vector<int>& frames,
                           int threads) {
  EvalReport report;
  RenderOptions opts;
  opts.threads = threads;
  for (int f : frames) {
    const auto& fd = data.frame(f);
    const auto img = render_image(model, fd.info.pose, fd.info.camera, f, opts);
    dataio::Image pred(img.width, img.height, 3);
    pred.data = img.color;
    report.frames.push_back({f, dataio::psnr(pred, fd.image), dataio::ssim(pred, fd.image)});
  }
  for (const auto& m : report.frames) {
    report.psnr += m.psnr / static_cast<double>(report.frames.size());
    report.ssim += m.ssim / static_cast<double>(report.frames.size());
  }
  return report;
}

Trainer::Trainer(const dataio::SceneDataset& data, const RunConfig& cfg)
    : data_(data), cfg_(cfg), rng_(cfg.train.seed), init_rng_(cfg.train.seed ^ 0x5bd1e995u) {
  cfg_.train.validate();
  cfg_.field.validate();
  cfg_.render.sampling.validate();
  data_.validate();
  if (data_.frames.empty()) throw InputError("cannot train on a scene without frames");

  std::vector<int> all;
  for (const auto& f : data_.frames) all.push_back(f.info.index);
  const auto split = dataio::split_frames(all, cfg_.train.split);
  train_ = split.train;
  test_ = split.test;
  if (train_.empty()) throw InputError("split '" + cfg_.train.split + "' leaves no training frames");

  model_.field = cfg_.field;
  model_.render = cfg_.render;
  model_.state.config = cfg_.progressive;
  base_ = build_scene_graph(data_.frame_infos(), scale_boxes(data_.tracks, cfg_.train.box_scale));

  for (int f : train_) {
    const auto& fd = data_.frame(f);
    if (!fd.lidar.empty()) lidar_[f] = project_lidar(fd.lidar, fd.info.pose, fd.info.camera);
  }
  crops_ = build_crop_bank(data_, train_, cfg_.field.crop);

  // Dry run of the allocation to split the budget across windows.
  ProgressiveState dry;
  dry.config = cfg_.progressive;
  std::vector<std::vector<int>> window_frames;
  for (int f : train_) {
    advance_window(dry, f, data_.frame(f).info.pose, base_);
    const auto a = static_cast<std::size_t>(dry.active());
    if (window_frames.size() <= a) window_frames.resize(a + 1);
    window_frames[a].push_back(f);
  }
  const double per_frame = static_cast<double>(cfg_.train.iterations) / static_cast<double>(train_.size());
  std::size_t seen = 0;
  for (const auto& frames : window_frames) {
    const double start = per_frame * static_cast<double>(seen);
    const double span = cfg_.train.frame_intro * per_frame * static_cast<double>(frames.size());
    for (std::size_t k = 0; k < frames.size(); ++k) {
      const int it = static_cast<int>(std::floor(start + span * static_cast<double>(k) / static_cast<double>(frames.size())));
      intro_.emplace_back(it, frames[k]);
    }
    seen += frames.size();
  }
  introduce(intro_[0].second);
  next_intro_ = 1;
}

void Trainer::introduce(int frame) {
  const FreezeHook hook = [this](int g) {
    cache_codes(g);
    opt_[static_cast<std::size_t>(g)].moments.clear();
    const auto& f = model_.fields[static_cast<std::size_t>(g)];
    return num::param_checksum(f.params());
  };
  const auto events = advance_window(model_.state, frame, data_.frame(frame).info.pose, base_, hook);
  for (const auto& e : events) {
    events_.push_back(e);
    if (e.kind != AllocationEvent::Kind::Spawn) continue;
    if (model_.fields.empty()) {
      model_.fields.push_back(fields::make_graph_fields<float>(cfg_.field, base_.registry, init_rng_));
    } else {
      model_.fields.push_back(fields::spawn_graph_fields<float>(cfg_.field, model_.fields.back(), init_rng_));
    }
    num::OptimState<float> opt;
    opt.learning_rate = cfg_.train.learning_rate;
    opt_.push_back(std::move(opt));
  }
}

fields::EncodingSchedule Trainer::schedule() const {
  fields::EncodingSchedule s;
  s.L_position = cfg_.field.L_position;
  s.L_direction = cfg_.field.L_direction;
  s.include_input = cfg_.field.include_input;
  s.mask_enabled = cfg_.field.freq_mask;
  s.t = iteration_;
  s.T = cfg_.train.horizon();
  return s;
}

sampling::Ray Trainer::make_ray(int frame, int x, int y) const {
  const auto& fd = data_.frame(frame);
  const auto it = lidar_.find(frame);
  const auto rays = sampling::generate_rays(fd.info.camera, fd.info.pose, frame, {{x, y}},
                                            fd.sky.empty() ? nullptr : &fd.sky,
                                            it == lidar_.end() ? nullptr : &it->second);
  return rays[0];
}

std::vector<sampling::Ray> Trainer::sample_batch(std::vector<rendering::Rgb>* targets) {
  const int a = model_.state.active();
  if (a < 0) throw ContractError("no active graph to sample from");
  const auto& frames = model_.state.graphs[static_cast<std::size_t>(a)].frames;
  std::uniform_int_distribution<std::size_t> pick_frame(0, frames.size() - 1);
  std::uniform_int_distribution<int> pick_x(0, data_.width - 1), pick_y(0, data_.height - 1);
  std::vector<sampling::Ray> rays;
  rays.reserve(static_cast<std::size_t>(cfg_.train.batch));
  if (targets) targets->clear();
  for (int r = 0; r < cfg_.train.batch; ++r) {
    const int f = frames[pick_frame(rng_)];
    const int x = pick_x(rng_);
    const int y = pick_y(rng_);
    rays.push_back(make_ray(f, x, y));
    if (targets) {
      const auto& img = data_.frame(f).image;
      targets->push_back({img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2)});
    }
  }
  return rays;
}

StepRecord Trainer::step() {
  while (next_intro_ < intro_.size() && intro_[next_intro_].first <= iteration_) {
    introduce(intro_[next_intro_].second);
    ++next_intro_;
  }
  std::vector<rendering::Rgb> targets;
  const auto rays = sample_batch(&targets);
  return step_on(rays, targets);
}

StepRecord Trainer::step_on(const std::vector<sampling::Ray>& rays, const std::vector<rendering::Rgb>& targets) {
  const int a = model_.state.active();
  if (a < 0) throw ContractError("no active graph to train");
  const auto ga = static_cast<std::size_t>(a);
  const LocalGraph& graph = model_.state.graphs[ga];
  auto& f = model_.fields[ga];

  StepRecord rec;
  rec.iter = iteration_ + 1;
  rec.active_graph = a;
  for (const auto& g : model_.state.graphs) rec.frozen_count += g.frozen ? 1 : 0;

  const auto params = f.params();
  try {
    Tape<float> tape(true);
    const auto batch = rendering::prepare_batch(rays, graph, cfg_.render, sampling::Mode::Train, &rng_);
    const auto codes = encoder_codes(tape, batch, graph.graph, f, cfg_.field, crops_, cfg_.train.encoder_crops, &rng_);
    const auto pooled = rendering::evaluate_fields(tape, batch, f, cfg_.field, schedule(), graph.center, codes);
    const auto render = rendering::composite_batch(batch, pooled, cfg_.render.depth_mode);
    const auto terms = loss_terms(batch, render, rays, targets, cfg_.train);
    auto scalar = [](const std::optional<Var<float>>& v) { return v ? static_cast<double>(v->value()[0]) : 0.0; };
    rec.L_c = scalar(terms.color);
    rec.L_d = scalar(terms.depth);
    rec.L_sigma = scalar(terms.sigma);
    rec.L_seg = scalar(terms.seg);
    rec.total = static_cast<double>(terms.total.value()[0]);
    if (!std::isfinite(rec.total)) throw NumericError("non-finite total loss");
    for (auto* p : params) p->zero_grad();
    tape.backward(terms.total);
    num::optimizer_step(opt_[ga], params);
  } catch (const NumericError& e) {
    for (auto* p : params) p->zero_grad();
    rec.aborted = true;
    rec.diagnostic = e.what();
  }
  ++iteration_;
  return rec;
}

void Trainer::cache_codes(int g) {
  auto& lg = model_.state.graphs.at(static_cast<std::size_t>(g));
  const auto& f = model_.fields.at(static_cast<std::size_t>(g));
  std::map<std::string, std::pair<LatentCodes, int>> class_sum;
  std::vector<int> missing;
  for (auto& node : lg.graph.objects) {
    const auto it = crops_.find(node.id);
    if (it == crops_.end() || it->second.empty()) {
      missing.push_back(node.id);
      continue;
    }
    Tape<float> tape(false);
    const std::size_t width = cfg_.field.crop * cfg_.field.crop * 3;
    Tensor<float> stack(Shape{it->second.size(), width});
    std::vector<std::size_t> group;
    for (std::size_t r = 0; r < it->second.size(); ++r) {
      for (std::size_t k = 0; k < width; ++k) stack.at(r, k) = it->second[r][k];
      group.push_back(r);
    }
    auto [cs, ca] = fields::encoder_forward(cfg_.field, f.encoder, tape.constant(std::move(stack)), {group});
    node.codes.shape.assign(cs.value().data().begin(), cs.value().data().end());
    node.codes.appearance.assign(ca.value().data().begin(), ca.value().data().end());
    auto& [sum, count] = class_sum[node.cls];
    if (sum.shape.empty()) {
      sum = node.codes;
    } else {
      for (std::size_t k = 0; k < sum.shape.size(); ++k) sum.shape[k] += node.codes.shape[k];
      for (std::size_t k = 0; k < sum.appearance.size(); ++k) sum.appearance[k] += node.codes.appearance[k];
    }
    ++count;
  }
  for (int id : missing) {
    auto& node = lg.graph.node(id);
    const auto it = class_sum.find(node.cls);
    if (it == class_sum.end()) continue;
    node.codes = it->second.first;
    for (auto& v : node.codes.shape) v /= it->second.second;
    for (auto& v : node.codes.appearance) v /= it->second.second;
  }
}

void Trainer::save_checkpoint(const std::filesystem::path& path) {
  const int a = model_.state.active();
  if (a >= 0) cache_codes(a);
  nlohmann::json extra = {{"iteration", iteration_},
                          {"scene", data_.name},
                          {"train", cfg_.train},
                          {"train_frames", train_},
                          {"test_frames", test_}};
  save_model(model_, path, extra);
}

void Trainer::run(const std::filesystem::path& out, std::ostream* log) {
  const int total = cfg_.train.iterations;
  while (iteration_ < total) {
    StepRecord rec = step();
    const int done = iteration_;
    const bool eval = cfg_.train.eval_every > 0 && done % cfg_.train.eval_every == 0 && !test_.empty();
    if (eval) {
      const int a = model_.state.active();
      if (a >= 0) cache_codes(a);
      rec.psnr = evaluate_frames(model_, data_, test_, cfg_.train.threads).psnr;
    }
    if (log && (done % cfg_.train.log_every == 0 || eval || rec.aborted || done == total)) {
      *log << rec.to_json().dump() << "\n";
      log->flush();
    }
    if (!out.empty() && ((cfg_.train.checkpoint_every > 0 && done % cfg_.train.checkpoint_every == 0) || done == total)) {
      char name[32];
      std::snprintf(name, sizeof(name), "ckpt_%08d.prosg", done);
      save_checkpoint(out / name);
    }
  }
}

#define PROSG_INSTANTIATE(T)                                                                                       \
  template rendering::InstanceCodes<T> encoder_codes(Tape<T>&, const PreparedBatch&, const SceneGraph&,          \
                                                     const fields::GraphFields<T>&, const fields::FieldConfig&,  \
                                                     const CropBank&, int, std::mt19937_64*);                    \
  template LossTerms<T> loss_terms(const PreparedBatch&, const rendering::BatchRender<T>&,                        \
                                   const std::vector<sampling::Ray>&, const std::vector<rendering::Rgb>&,         \
                                   const TrainConfig&);
PROSG_INSTANTIATE(float)
PROSG_INSTANTIATE(double)
#undef PROSG_INSTANTIATE

}  // namespace prosg::training
