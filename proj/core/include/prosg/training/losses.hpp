// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "prosg/numerics/ops.hpp"
#include "prosg/rendering/composite.hpp"

#include <cstdint>
#include <vector>

namespace prosg::training {

struct LossWeights {
  double color = 1.0;
  double depth = 0.005;
  double sigma = 0.005;
  double seg = 0.001;

  /// Throws ConfigError on a negative weight.
  void validate() const;
};

/// Sign convention of the ray-distribution loss.
enum class SigmaSign {
  Descent,  ///< -sum log(h + eps) g delta: minimising pulls weight to the lidar depth
  Printed,  ///< +sum log(h + eps) g delta
};

inline constexpr double kLogEps = 1e-8;

// Reference implementations on plain arrays.

/// Mean over all rays and channels of (pred - target)^2.
double color_loss(const std::vector<rendering::Rgb>& pred, const std::vector<rendering::Rgb>& target);
/// Mean of (pred - lidar)^2 over rays whose lidar value is not NaN; 0 when none are.
double depth_loss(const std::vector<double>& pred, const std::vector<double>& lidar);
/// One ray: -sum_i log(h_i + eps) exp(-(t_i - D)^2 / (2 var)) delta_i (Descent sign).
double ray_distribution_loss(const std::vector<double>& h, const std::vector<double>& t,
                             const std::vector<double>& delta, double depth, double variance,
                             SigmaSign sign = SigmaSign::Descent);
/// Mean over sky rays of sum_i w_i^2 delta_i; 0 without sky rays.
double sky_loss(const std::vector<std::vector<double>>& weights, const std::vector<std::vector<double>>& delta,
                const std::vector<bool>& sky);

// Differentiable versions over a padded (rays x slots) sample grid.

template <typename T>
num::Var<T> color_loss(num::Var<T> pred, const num::Tensor<T>& target);

/// `lidar` per ray, NaN where absent. Returns a constant zero without valid rays.
template <typename T>
num::Var<T> depth_loss(num::Var<T> depth, const std::vector<double>& lidar);

/// Averaged over rays with lidar; `valid` marks real (non-padding) slots.
template <typename T>
num::Var<T> ray_distribution_loss(num::Var<T> weights, const std::vector<double>& t, const std::vector<double>& delta,
                                  const std::vector<std::uint8_t>& valid, const std::vector<double>& lidar,
                                  double variance, SigmaSign sign = SigmaSign::Descent);

template <typename T>
num::Var<T> sky_loss(num::Var<T> weights, const std::vector<double>& delta, const std::vector<std::uint8_t>& valid,
                     const std::vector<bool>& sky);

}  // namespace prosg::training
