// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "prosg/training/losses.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>

namespace prosg::training {

struct TrainConfig {
  int iterations = 20000;
  int batch = 1024;
  double learning_rate = 5e-4;
  /// Iteration at which the frequency mask is fully open, as a share of `iterations`.
  double freq_horizon = 0.3;
  /// Lidar noise variance in square metres.
  double depth_variance = 0.05;
  std::uint64_t seed = 0;
  int eval_every = 1000;
  int checkpoint_every = 5000;
  int log_every = 10;
  std::string split = "full";
  SigmaSign sigma_sign = SigmaSign::Descent;
  LossWeights weights;
  double box_scale = 1.2;
  /// Crops averaged per instance and step by the encoder.
  int encoder_crops = 8;
  /// Share of each window's budget over which its frames are introduced.
  double frame_intro = 0.5;
  int threads = 1;

  /// T of the frequency mask in iterations.
  double horizon() const { return freq_horizon * iterations; }
  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

}  // namespace prosg::training
