// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "prosg/config.hpp"
#include "prosg/dataio/dataset.hpp"
#include "prosg/numerics/adam.hpp"
#include "prosg/rendering/model.hpp"
#include "prosg/training/losses.hpp"
#include "prosg/training/train_config.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace prosg::training {

/// Masked instance crops per track id.
using CropBank = std::map<int, std::vector<std::vector<float>>>;

/// Crops of every track visible in `frames`.
CropBank build_crop_bank(const dataio::SceneDataset& data, const std::vector<int>& frames, std::size_t crop);

/// Codes for the batch instances: the encoder averaged over up to `max_crops`
/// crops per instance (a random subset when `rng` is given and more exist).
/// Instances without crops fall back to their cached codes.
template <typename T>
rendering::InstanceCodes<T> encoder_codes(num::Tape<T>& tape, const rendering::PreparedBatch& batch,
                                          const SceneGraph& graph, const fields::GraphFields<T>& f,
                                          const fields::FieldConfig& cfg, const CropBank& crops, int max_crops,
                                          std::mt19937_64* rng);

/// Weighted loss terms; a term with weight zero is never built.
template <typename T>
struct LossTerms {
  std::optional<num::Var<T>> color, depth, sigma, seg;
  num::Var<T> total;
};

template <typename T>
LossTerms<T> loss_terms(const rendering::PreparedBatch& batch, const rendering::BatchRender<T>& render,
                        const std::vector<sampling::Ray>& rays, const std::vector<rendering::Rgb>& targets,
                        const TrainConfig& cfg);

struct StepRecord {
  int iter = 0;
  double L_c = 0.0, L_d = 0.0, L_sigma = 0.0, L_seg = 0.0, total = 0.0;
  std::optional<double> psnr;
  int active_graph = -1;
  int frozen_count = 0;
  bool aborted = false;
  std::string diagnostic;

  nlohmann::json to_json() const;
};

struct FrameMetrics {
  int frame = 0;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct EvalReport {
  std::vector<FrameMetrics> frames;
  double psnr = 0.0;  ///< mean over frames
  double ssim = 0.0;
};

/// Renders each frame at its recorded pose and compares against the image.
EvalReport evaluate_frames(const SceneModel& model, const dataio::SceneDataset& data, const std::vector<int>& frames,
                           int threads = 1);

/// Progressive training over one dataset. The dataset must outlive the trainer.
class Trainer {
 public:
  Trainer(const dataio::SceneDataset& data, const RunConfig& cfg);

  /// Introduces the frames scheduled for this iteration, then trains one batch
  /// drawn uniformly from the active graph's frames.
  StepRecord step();
  /// One optimisation step on an explicit batch against the active graph.
  StepRecord step_on(const std::vector<sampling::Ray>& rays, const std::vector<rendering::Rgb>& targets);

  /// Full loop: metrics NDJSON to `log` and checkpoints under `out` when non-empty.
  void run(const std::filesystem::path& out, std::ostream* log = nullptr);

  /// Writes encoder codes (mean over all training crops) into the nodes of `graph`.
  void cache_codes(int graph);
  void save_checkpoint(const std::filesystem::path& path);

  std::vector<sampling::Ray> sample_batch(std::vector<rendering::Rgb>* targets);

  const SceneModel& model() const { return model_; }
  SceneModel& model() { return model_; }
  const RunConfig& config() const { return cfg_; }
  int iteration() const { return iteration_; }
  const std::vector<int>& train_frames() const { return train_; }
  const std::vector<int>& test_frames() const { return test_; }
  const std::vector<AllocationEvent>& events() const { return events_; }
  const CropBank& crops() const { return crops_; }
  const num::OptimState<float>& optimizer(int graph) const { return opt_.at(static_cast<std::size_t>(graph)); }
  fields::EncodingSchedule schedule() const;
  /// Ray with pixel colour and supervision for frame `frame`, pixel (x, y).
  sampling::Ray make_ray(int frame, int x, int y) const;

 private:
  void introduce(int frame);

  const dataio::SceneDataset& data_;
  RunConfig cfg_;
  SceneModel model_;
  SceneGraph base_;
  std::vector<num::OptimState<float>> opt_;
  std::vector<int> train_, test_;
  std::map<int, sampling::SparseDepth> lidar_;
  CropBank crops_;
  std::vector<std::pair<int, int>> intro_;  ///< (iteration, frame), ascending
  std::size_t next_intro_ = 0;
  std::vector<AllocationEvent> events_;
  std::mt19937_64 rng_;
  std::mt19937_64 init_rng_;
  int iteration_ = 0;
};

}  // namespace prosg::training
