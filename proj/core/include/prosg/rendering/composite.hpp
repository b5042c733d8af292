// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <map>
#include <vector>

namespace prosg::rendering {

using Rgb = std::array<double, 3>;

enum class DepthMode {
  Distance,  ///< D = sum w_i t_i
  Interval,  ///< D = sum w_i delta_i
};

/// Per-ray samples with their field values, ordered by t.
struct CompositeInput {
  std::vector<double> t;
  std::vector<double> delta;
  std::vector<double> sigma;
  std::vector<Rgb> rgb;
  /// Owning node per sample (optional; enables per-node totals).
  std::vector<int> node;
  Rgb far{0.0, 0.0, 0.0};
  bool far_tail = true;
};

struct RenderOutput {
  Rgb color{0.0, 0.0, 0.0};
  double depth = 0.0;
  std::vector<double> weights;  ///< w_i = T_i alpha_i
  double T_end = 1.0;
  /// Sum of weights per node, far-field included under its own id.
  std::map<int, double> node_weight;
  /// Premultiplied colour per node (sum_i w_i c_i over the node's samples).
  std::map<int, Rgb> node_color;
};

/// alpha_i = 1 - exp(-sigma_i delta_i), T_i = exp(-sum_{k<i} sigma_k delta_k),
/// C = sum T_i alpha_i c_i + T_end far. Throws ContractError on negative or
/// NaN sigma or delta and ShapeError on length mismatches.
RenderOutput composite(const CompositeInput& in, DepthMode mode = DepthMode::Distance, int far_node = -4);

}  // namespace prosg::rendering
