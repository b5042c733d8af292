// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

// prosg: generate, train, render, evaluate, edit and serve progressive scene graphs.

#include "prosg/config.hpp"
#include "prosg/dataio/dataset.hpp"
#include "prosg/dataio/image_io.hpp"
#include "prosg/dataio/split.hpp"
#include "prosg/dataio/synthetic.hpp"
#include "prosg/error.hpp"
#include "prosg/rendering/model.hpp"
#include "prosg/scenegraph/edit.hpp"
#include "prosg/scenegraph/graph_json.hpp"
#include "prosg/service/render_service.hpp"
#include "prosg/training/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace prosg;

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << j.dump(2) << "\n";
  if (!out) throw LoadError("cannot write " + path.string());
}

void write_render(const fs::path& path, const RenderedImage& img) {
  dataio::Image out(img.width, img.height, 3);
  out.data = img.color;
  dataio::write_png(path, out);
}

Camera sized_camera(const SceneModel& model, int width, int height) {
  Camera cam = model.state.graphs.at(0).graph.camera;
  if (width > 0 && height > 0) {
    cam.K.row(0) *= static_cast<double>(width) / cam.width;
    cam.K.row(1) *= static_cast<double>(height) / cam.height;
    cam.width = width;
    cam.height = height;
  }
  return cam;
}

/// Camera pose recorded for `frame` in any local graph.
Pose recorded_pose(const SceneModel& model, int frame) {
  for (const auto& g : model.state.graphs) {
    const auto it = g.graph.camera_track.find(frame);
    if (it != g.graph.camera_track.end()) return it->second;
  }
  throw LookupError("checkpoint has no camera pose for frame " + std::to_string(frame));
}

struct GenArgs {
  std::string spec;
  std::string out;
  std::vector<std::string> set;
};

int cmd_gen(const GenArgs& a) {
  json j = dataio::SyntheticConfig{};
  if (!a.spec.empty()) j = merge_layer(j, read_json(a.spec), a.spec);
  for (const auto& s : a.set) j = apply_override(j, s);
  dataio::SyntheticConfig cfg;
  try {
    cfg = j.get<dataio::SyntheticConfig>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad synthetic scene value: ") + e.what());
  }
  dataio::generate_synthetic(cfg, a.out);
  std::cout << "wrote synthetic scene (" << cfg.frames << " frames, " << cfg.objects << " objects) to " << a.out
            << "\n";
  return 0;
}

struct TrainArgs {
  std::string scene, out, config;
  std::vector<std::string> set;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

int cmd_train(const TrainArgs& a) {
  auto overrides = a.set;
  if (a.seed) overrides.push_back("train.seed=" + std::to_string(*a.seed));
  if (a.threads) overrides.push_back("train.threads=" + std::to_string(*a.threads));
  json resolved;
  const RunConfig cfg =
      resolve_config(a.config.empty() ? std::nullopt : std::optional<fs::path>(a.config), overrides, &resolved);
  std::cout << resolved.dump(2) << "\n";
  const auto data = dataio::load_scene(a.scene);
  fs::create_directories(a.out);
  write_json(fs::path(a.out) / "config.json", resolved);
  training::Trainer trainer(data, cfg);
  std::ofstream log(fs::path(a.out) / "metrics.ndjson");
  trainer.run(a.out, &log);
  std::cout << "trained " << trainer.iteration() << " iterations, " << trainer.model().state.graphs.size()
            << " local graph(s)\n";
  return 0;
}

struct RenderArgs {
  std::string checkpoint, out, trajectory, graph;
  std::optional<int> frame;
  int width = 0, height = 0, threads = 1;
  bool layers = false;
};

void apply_graph_override(SceneModel& model, const std::string& path) {
  if (path.empty()) return;
  ProgressiveState s = state_from_json(read_json(path));
  if (s.graphs.size() != model.state.graphs.size()) {
    throw InputError("graph file has " + std::to_string(s.graphs.size()) + " local graphs, the checkpoint has " +
                     std::to_string(model.state.graphs.size()));
  }
  model.state = std::move(s);
  model.validate();
}

int cmd_render(const RenderArgs& a) {
  SceneModel model = load_model(a.checkpoint);
  apply_graph_override(model, a.graph);
  const Camera cam = sized_camera(model, a.width, a.height);
  RenderOptions opts;
  opts.threads = a.threads;
  opts.layers = a.layers;
  fs::create_directories(a.out);

  std::vector<std::pair<Pose, int>> views;
  if (!a.trajectory.empty()) {
    const json t = read_json(a.trajectory);
    if (!t.contains("poses") || !t["poses"].is_array()) throw InputError("trajectory needs a 'poses' list");
    const auto& poses = t["poses"];
    for (std::size_t i = 0; i < poses.size(); ++i) {
      int frame = a.frame.value_or(t.value("frame", 0));
      if (t.contains("frames")) frame = t["frames"].at(i).get<int>();
      Pose p = pose_from_json(poses[i]);
      p.validate(1e-6);
      views.emplace_back(p, frame);
    }
  } else {
    const int frame = a.frame.value_or(0);
    views.emplace_back(recorded_pose(model, frame), frame);
  }
  for (std::size_t i = 0; i < views.size(); ++i) {
    const auto img = render_image(model, views[i].first, cam, views[i].second, opts);
    char name[64];
    std::snprintf(name, sizeof(name), "frame_%04zu.png", i);
    write_render(fs::path(a.out) / name, img);
    for (const auto& [node, layer] : img.layers) {
      dataio::Image li(img.width, img.height, 4);
      li.data = layer;
      std::snprintf(name, sizeof(name), "frame_%04zu_node%d.png", i, node);
      dataio::write_png(fs::path(a.out) / name, li);
    }
  }
  std::cout << "rendered " << views.size() << " image(s) to " << a.out << "\n";
  return 0;
}

struct EvalArgs {
  std::string checkpoint, scene, split = "full", out;
  int threads = 1;
};

int cmd_eval(const EvalArgs& a) {
  const SceneModel model = load_model(a.checkpoint);
  const auto data = dataio::load_scene(a.scene);
  std::vector<int> all;
  for (const auto& f : data.frames) all.push_back(f.info.index);
  const auto split = dataio::split_frames(all, a.split);
  json rows = json::array();
  auto add_row = [&](const std::string& set, const std::vector<int>& frames) {
    const auto r = training::evaluate_frames(model, data, frames, a.threads);
    json per = json::array();
    for (const auto& m : r.frames) per.push_back({{"frame", m.frame}, {"psnr", m.psnr}, {"ssim", m.ssim}});
    rows.push_back({{"split", a.split}, {"set", set}, {"frames", frames.size()}, {"psnr", r.psnr},
                    {"ssim", r.ssim}, {"per_frame", per}});
  };
  // "full" trains on every frame, so its only row scores the training frames.
  if (split.test.empty()) {
    add_row("train", split.train);
  } else {
    add_row("train", split.train);
    add_row("test", split.test);
  }
  std::cout << std::left << std::setw(8) << "split" << std::setw(8) << "set" << std::setw(8) << "frames"
            << std::setw(10) << "PSNR" << "SSIM\n";
  for (const auto& r : rows) {
    std::cout << std::setw(8) << r["split"].get<std::string>() << std::setw(8) << r["set"].get<std::string>()
              << std::setw(8) << r["frames"].get<std::size_t>() << std::setw(10) << std::fixed
              << std::setprecision(3) << r["psnr"].get<double>() << std::setprecision(4) << r["ssim"].get<double>()
              << "\n";
  }
  if (!a.out.empty()) write_json(a.out, {{"checkpoint", a.checkpoint}, {"scene", a.scene}, {"rows", rows}});
  return 0;
}

struct EditArgs {
  std::string checkpoint, script, out;
  std::optional<int> frame;
  int threads = 1;
};

int cmd_edit(const EditArgs& a) {
  SceneModel model = load_model(a.checkpoint);
  const json script = read_json(a.script);
  const int frame = a.frame.value_or(model.state.graphs.at(0).graph.camera_track.begin()->first);
  const Pose pose = recorded_pose(model, frame);
  const Camera cam = sized_camera(model, 0, 0);
  RenderOptions opts;
  opts.threads = a.threads;
  fs::create_directories(a.out);
  write_render(fs::path(a.out) / "before.png", render_image(model, pose, cam, frame, opts));
  const auto inserted = apply_edit_script(model.state, script);
  write_render(fs::path(a.out) / "after.png", render_image(model, pose, cam, frame, opts));
  write_json(fs::path(a.out) / "graph.json", state_to_json(model.state, a.checkpoint));
  save_model(model, fs::path(a.out) / "edited.prosg", {{"edited_from", a.checkpoint}, {"script", script}});
  std::cout << "applied " << script.at("ops").size() << " op(s)";
  if (!inserted.empty()) {
    std::cout << ", inserted node(s)";
    for (int id : inserted) std::cout << " " << id;
  }
  std::cout << "; wrote " << a.out << "\n";
  return 0;
}

struct ServeArgs {
  std::string checkpoint;
  std::optional<std::string> bind;
  int threads = 1;
  int max_width = 320, max_height = 240;
};

service::RenderService* g_service = nullptr;

int cmd_serve(const ServeArgs& a) {
  service::ServiceConfig cfg;
  cfg.threads = a.threads;
  cfg.max_width = a.max_width;
  cfg.max_height = a.max_height;
  service::RenderService svc(cfg);
  svc.load(load_model(a.checkpoint), a.checkpoint);
  const std::string address = service::bind_address(a.bind);
  g_service = &svc;
  std::signal(SIGINT, [](int) {
    if (g_service) g_service->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_service) g_service->stop();
  });
  std::cerr << "serving " << a.checkpoint << " on " << address << "\n";
  svc.serve(address);
  g_service = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prosg: progressive neural scene graphs for dynamic driving scenes"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic scene with exact ground truth");
  g->add_option("--spec", gen.spec, "Synthetic scene spec (JSON)")->check(CLI::ExistingFile);
  g->add_option("--out", gen.out, "Output scene directory")->required();
  g->add_option("--set", gen.set, "Override a spec value (key=value)");

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train a model on a scene");
  t->add_option("--scene", train.scene, "Scene directory containing scene.json")->required()->check(CLI::ExistingDirectory);
  t->add_option("--out", train.out, "Run directory for checkpoints and metrics")->required();
  t->add_option("--config", train.config, "Config file (JSON)")->check(CLI::ExistingFile);
  t->add_option("--set", train.set, "Dotted override, e.g. train.iterations=500");
  t->add_option("--seed", train.seed, "Random seed");
  t->add_option("--threads", train.threads, "Worker threads");

  RenderArgs render;
  auto* r = app.add_subcommand("render", "Render views from a checkpoint");
  r->add_option("--checkpoint", render.checkpoint, "Model checkpoint")->required()->check(CLI::ExistingFile);
  r->add_option("--out", render.out, "Output directory")->required();
  r->add_option("--trajectory", render.trajectory, "Trajectory JSON {poses: [3x4, ...]}")->check(CLI::ExistingFile);
  r->add_option("--graph", render.graph, "Exported graph JSON replacing the checkpoint graph")->check(CLI::ExistingFile);
  r->add_option("--frame", render.frame, "Frame index (object poses; recorded camera without a trajectory)");
  r->add_option("--width", render.width, "Image width (default: training width)");
  r->add_option("--height", render.height, "Image height (default: training height)");
  r->add_option("--threads", render.threads, "Worker threads")->check(CLI::PositiveNumber);
  r->add_flag("--layers", render.layers, "Also write per-node decomposition layers");

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Score a checkpoint against a scene split");
  e->add_option("--checkpoint", eval.checkpoint, "Model checkpoint")->required()->check(CLI::ExistingFile);
  e->add_option("--scene", eval.scene, "Scene directory")->required()->check(CLI::ExistingDirectory);
  e->add_option("--split", eval.split, "Split tag")->check(CLI::IsMember(dataio::split_tags()));
  e->add_option("--out", eval.out, "Write the metrics table as JSON");
  e->add_option("--threads", eval.threads, "Worker threads")->check(CLI::PositiveNumber);

  EditArgs edit;
  auto* d = app.add_subcommand("edit", "Apply an edit script and render before/after");
  d->add_option("--checkpoint", edit.checkpoint, "Model checkpoint")->required()->check(CLI::ExistingFile);
  d->add_option("--script", edit.script, "Edit script JSON")->required()->check(CLI::ExistingFile);
  d->add_option("--out", edit.out, "Output directory")->required();
  d->add_option("--frame", edit.frame, "Frame to render (default: first)");
  d->add_option("--threads", edit.threads, "Worker threads")->check(CLI::PositiveNumber);

  ServeArgs serve;
  auto* s = app.add_subcommand("serve", "Serve the render/edit HTTP API");
  s->add_option("--checkpoint", serve.checkpoint, "Model checkpoint")->required()->check(CLI::ExistingFile);
  s->add_option("--bind", serve.bind, "host:port (default: $PROSG_BIND or 127.0.0.1:8080)");
  s->add_option("--threads", serve.threads, "Render threads")->check(CLI::PositiveNumber);
  s->add_option("--max-width", serve.max_width, "Largest render width");
  s->add_option("--max-height", serve.max_height, "Largest render height");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*g) return cmd_gen(gen);
    if (*t) return cmd_train(train);
    if (*r) return cmd_render(render);
    if (*e) return cmd_eval(eval);
    if (*d) return cmd_edit(edit);
    if (*s) return cmd_serve(serve);
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return exit_code_for(err);
  } catch (const fs::filesystem_error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 3;
  }
  return 1;
}
