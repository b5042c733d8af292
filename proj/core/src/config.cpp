// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "prosg/config.hpp"

#include "prosg/dataio/split.hpp"
#include "prosg/error.hpp"

#include <algorithm>
#include <fstream>

namespace prosg {
using nlohmann::json;

namespace training {

void TrainConfig::validate() const {
  if (iterations < 1) throw ConfigError("train.iterations must be at least 1");
  if (batch < 1) throw ConfigError("train.batch must be at least 1");
  if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate must be positive");
  if (!(freq_horizon > 0.0)) throw ConfigError("train.freq_horizon must be positive");
  if (!(depth_variance > 0.0)) throw ConfigError("train.depth_variance must be positive");
  if (eval_every < 0 || checkpoint_every < 0 || log_every < 1) throw ConfigError("train cadences must be non-negative");
  if (!(box_scale > 0.0)) throw ConfigError("train.box_scale must be positive");
  if (encoder_crops < 1) throw ConfigError("train.encoder_crops must be at least 1");
  if (frame_intro < 0.0 || frame_intro > 1.0) throw ConfigError("train.frame_intro must lie in [0, 1]");
  if (threads < 1) throw ConfigError("train.threads must be at least 1");
  const auto& tags = dataio::split_tags();
  if (std::find(tags.begin(), tags.end(), split) == tags.end()) throw ConfigError("unknown split '" + split + "'");
  weights.validate();
}

void to_json(json& j, const TrainConfig& c) {
  j = {{"iterations", c.iterations},
       {"batch", c.batch},
       {"learning_rate", c.learning_rate},
       {"freq_horizon", c.freq_horizon},
       {"depth_variance", c.depth_variance},
       {"seed", c.seed},
       {"eval_every", c.eval_every},
       {"checkpoint_every", c.checkpoint_every},
       {"log_every", c.log_every},
       {"split", c.split},
       {"sigma_sign", c.sigma_sign == SigmaSign::Descent ? "descent" : "printed"},
       {"weights", {{"color", c.weights.color}, {"depth", c.weights.depth}, {"sigma", c.weights.sigma}, {"seg", c.weights.seg}}},
       {"box_scale", c.box_scale},
       {"encoder_crops", c.encoder_crops},
       {"frame_intro", c.frame_intro},
       {"threads", c.threads}};
}

void from_json(const json& j, TrainConfig& c) {
  const TrainConfig d;
  c.iterations = j.value("iterations", d.iterations);
  c.batch = j.value("batch", d.batch);
  c.learning_rate = j.value("learning_rate", d.learning_rate);
  c.freq_horizon = j.value("freq_horizon", d.freq_horizon);
  c.depth_variance = j.value("depth_variance", d.depth_variance);
  c.seed = j.value("seed", d.seed);
  c.eval_every = j.value("eval_every", d.eval_every);
  c.checkpoint_every = j.value("checkpoint_every", d.checkpoint_every);
  c.log_every = j.value("log_every", d.log_every);
  c.split = j.value("split", d.split);
  const std::string sign = j.value("sigma_sign", std::string("descent"));
  if (sign != "descent" && sign != "printed") throw ConfigError("train.sigma_sign must be 'descent' or 'printed'");
  c.sigma_sign = sign == "descent" ? SigmaSign::Descent : SigmaSign::Printed;
  const json w = j.value("weights", json::object());
  c.weights.color = w.value("color", d.weights.color);
  c.weights.depth = w.value("depth", d.weights.depth);
  c.weights.sigma = w.value("sigma", d.weights.sigma);
  c.weights.seg = w.value("seg", d.weights.seg);
  c.box_scale = j.value("box_scale", d.box_scale);
  c.encoder_crops = j.value("encoder_crops", d.encoder_crops);
  c.frame_intro = j.value("frame_intro", d.frame_intro);
  c.threads = j.value("threads", d.threads);
  c.validate();
}

}  // namespace training

void to_json(json& j, const ProgressiveConfig& c) {
  j = {{"bound_radius", c.bound_radius}, {"overlap", c.overlap}, {"idw_power", c.idw_power}};
}

void from_json(const json& j, ProgressiveConfig& c) {
  const ProgressiveConfig d;
  c.bound_radius = j.value("bound_radius", d.bound_radius);
  c.overlap = j.value("overlap", d.overlap);
  c.idw_power = j.value("idw_power", d.idw_power);
  if (!(c.bound_radius > 0.0)) throw ConfigError("progressive.bound_radius must be positive");
  if (c.overlap < 0) throw ConfigError("progressive.overlap must be non-negative");
  if (!(c.idw_power > 0.0)) throw ConfigError("progressive.idw_power must be positive");
}

void to_json(json& j, const RunConfig& c) {
  j = {{"field", c.field}, {"render", c.render}, {"progressive", c.progressive}, {"train", c.train}};
}

void from_json(const json& j, RunConfig& c) {
  try {
    c.field = j.value("field", json::object()).get<fields::FieldConfig>();
    c.field.validate();
    c.render = j.value("render", json::object()).get<rendering::RenderConfig>();
    c.progressive = j.value("progressive", json::object()).get<ProgressiveConfig>();
    c.train = j.value("train", json::object()).get<training::TrainConfig>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad configuration value: ") + e.what());
  }
}

namespace {

void merge_into(json& base, const json& layer, const std::string& path, const std::string& source) {
  for (const auto& [key, value] : layer.items()) {
    const std::string full = path.empty() ? key : path + "." + key;
    if (!base.contains(key)) throw ConfigError(source + ": unknown configuration key '" + full + "'");
    if (base[key].is_object()) {
      if (!value.is_object()) throw ConfigError(source + ": '" + full + "' must be an object");
      merge_into(base[key], value, full, source);
    } else {
      base[key] = value;
    }
  }
}

}  // namespace

json merge_layer(json base, const json& layer, const std::string& source) {
  if (!layer.is_object()) throw ConfigError(source + ": configuration must be a JSON object");
  merge_into(base, layer, "", source);
  return base;
}

json apply_override(json base, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    parts.push_back(key.substr(start, dot == std::string::npos ? std::string::npos : dot - start));
    if (parts.back().empty()) throw ConfigError("override key '" + key + "' has an empty component");
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  // String-valued keys take the raw text, so split=50 means "50".
  const json* target = &base;
  for (const auto& part : parts) {
    if (!target->is_object() || !target->contains(part)) {
      target = nullptr;
      break;
    }
    target = &(*target)[part];
  }
  if (target && target->is_string() && !value.is_string()) value = text;
  json layer = value;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) layer = json{{*it, layer}};
  return merge_layer(std::move(base), layer, "--set " + key);
}

RunConfig resolve_config(const std::optional<std::filesystem::path>& file, const std::vector<std::string>& overrides,
                         json* resolved) {
  json j = RunConfig{};
  if (file) {
    std::ifstream in(*file);
    if (!in) throw LoadError("cannot read config file " + file->string());
    json layer;
    try {
      layer = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError("malformed config file " + file->string() + ": " + e.what());
    }
    j = merge_layer(std::move(j), layer, file->string());
  }
  for (const auto& o : overrides) j = apply_override(std::move(j), o);
  RunConfig c = j.get<RunConfig>();
  if (resolved) *resolved = j;
  return c;
}

}  // namespace prosg
