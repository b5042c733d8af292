// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "prosg/training/losses.hpp"

#include "prosg/error.hpp"

#include <cmath>

namespace prosg::training {

using num::Shape;
using num::Tensor;
using num::Var;

void LossWeights::validate() const {
  if (!(color >= 0.0) || !(depth >= 0.0) || !(sigma >= 0.0) || !(seg >= 0.0)) {
    throw ConfigError("loss weights must be non-negative");
  }
}

double color_loss(const std::vector<rendering::Rgb>& pred, const std::vector<rendering::Rgb>& target) {
  if (pred.size() != target.size()) throw ShapeError("color_loss: batch sizes differ");
  if (pred.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    for (int c = 0; c < 3; ++c) acc += (pred[i][c] - target[i][c]) * (pred[i][c] - target[i][c]);
  return acc / static_cast<double>(3 * pred.size());
}

double depth_loss(const std::vector<double>& pred, const std::vector<double>& lidar) {
  if (pred.size() != lidar.size()) throw ShapeError("depth_loss: batch sizes differ");
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (std::isnan(lidar[i])) continue;
    acc += (pred[i] - lidar[i]) * (pred[i] - lidar[i]);
    ++n;
  }
  return n == 0 ? 0.0 : acc / static_cast<double>(n);
}

double ray_distribution_loss(const std::vector<double>& h, const std::vector<double>& t,
                             const std::vector<double>& delta, double depth, double variance, SigmaSign sign) {
  if (h.size() != t.size() || h.size() != delta.size()) throw ShapeError("ray_distribution_loss: lengths differ");
  if (!(variance > 0.0)) throw ContractError("ray_distribution_loss needs a positive variance");
  double acc = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double g = std::isinf(variance) ? 1.0 : std::exp(-(t[i] - depth) * (t[i] - depth) / (2.0 * variance));
    acc += std::log(h[i] + kLogEps) * g * delta[i];
  }
  return sign == SigmaSign::Descent ? -acc : acc;
}

double sky_loss(const std::vector<std::vector<double>>& weights, const std::vector<std::vector<double>>& delta,
                const std::vector<bool>& sky) {
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t r = 0; r < weights.size(); ++r) {
    if (!sky[r]) continue;
    for (std::size_t i = 0; i < weights[r].size(); ++i) acc += weights[r][i] * weights[r][i] * delta[r][i];
    ++n;
  }
  return n == 0 ? 0.0 : acc / static_cast<double>(n);
}

template <typename T>
Var<T> color_loss(Var<T> pred, const Tensor<T>& target) {
  if (pred.shape() != target.shape()) {
    throw ShapeError("color_loss: prediction " + num::to_string(pred.shape()) + " vs target " +
                     num::to_string(target.shape()));
  }
  return num::mean(num::square(num::sub(pred, pred.tape->constant(target))));
}

template <typename T>
Var<T> depth_loss(Var<T> depth, const std::vector<double>& lidar) {
  const std::size_t R = depth.rows();
  if (lidar.size() != R) throw ShapeError("depth_loss: lidar count does not match rays");
  std::size_t n = 0;
  for (double v : lidar) n += std::isnan(v) ? 0 : 1;
  if (n == 0) return depth.tape->constant(Tensor<T>::scalar(T(0)));
  Tensor<T> target(Shape{R, 1}), weight(Shape{R, 1});
  for (std::size_t r = 0; r < R; ++r) {
    if (std::isnan(lidar[r])) continue;
    target[r] = static_cast<T>(lidar[r]);
    weight[r] = T(1) / static_cast<T>(n);
  }
  auto& tape = *depth.tape;
  return num::sum(num::mul(num::square(num::sub(depth, tape.constant(std::move(target)))),
                           tape.constant(std::move(weight))));
}

template <typename T>
Var<T> ray_distribution_loss(Var<T> weights, const std::vector<double>& t, const std::vector<double>& delta,
                             const std::vector<std::uint8_t>& valid, const std::vector<double>& lidar,
                             double variance, SigmaSign sign) {
  if (!(variance > 0.0)) throw ContractError("ray_distribution_loss needs a positive variance");
  const std::size_t R = weights.rows(), S = weights.cols();
  if (t.size() != R * S || delta.size() != R * S || valid.size() != R * S || lidar.size() != R) {
    throw ShapeError("ray_distribution_loss: grid sizes do not match the weights");
  }
  std::size_t n = 0;
  for (double v : lidar) n += std::isnan(v) ? 0 : 1;
  if (n == 0) return weights.tape->constant(Tensor<T>::scalar(T(0)));
  Tensor<T> coef(Shape{R, S});
  const double s = (sign == SigmaSign::Descent ? -1.0 : 1.0) / static_cast<double>(n);
  for (std::size_t r = 0; r < R; ++r) {
    if (std::isnan(lidar[r])) continue;
    for (std::size_t i = 0; i < S; ++i) {
      const std::size_t k = r * S + i;
      if (!valid[k]) continue;
      const double g = std::exp(-(t[k] - lidar[r]) * (t[k] - lidar[r]) / (2.0 * variance));
      coef[k] = static_cast<T>(s * g * delta[k]);
    }
  }
  auto& tape = *weights.tape;
  return num::sum(num::mul(num::log(num::add_scalar(weights, static_cast<T>(kLogEps))), tape.constant(std::move(coef))));
}

template <typename T>
Var<T> sky_loss(Var<T> weights, const std::vector<double>& delta, const std::vector<std::uint8_t>& valid,
                const std::vector<bool>& sky) {
  const std::size_t R = weights.rows(), S = weights.cols();
  if (delta.size() != R * S || valid.size() != R * S || sky.size() != R) {
    throw ShapeError("sky_loss: grid sizes do not match the weights");
  }
  std::size_t n = 0;
  for (bool s : sky) n += s ? 1 : 0;
  if (n == 0) return weights.tape->constant(Tensor<T>::scalar(T(0)));
  Tensor<T> coef(Shape{R, S});
  for (std::size_t r = 0; r < R; ++r) {
    if (!sky[r]) continue;
    for (std::size_t i = 0; i < S; ++i) {
      const std::size_t k = r * S + i;
      if (valid[k]) coef[k] = static_cast<T>(delta[k] / static_cast<double>(n));
    }
  }
  return num::sum(num::mul(num::square(weights), weights.tape->constant(std::move(coef))));
}

#define PROSG_INSTANTIATE_LOSSES(T)                                                                           \
  template Var<T> color_loss(Var<T>, const Tensor<T>&);                                                     \
  template Var<T> depth_loss(Var<T>, const std::vector<double>&);                                           \
  template Var<T> ray_distribution_loss(Var<T>, const std::vector<double>&, const std::vector<double>&,     \
                                        const std::vector<std::uint8_t>&, const std::vector<double>&, double, \
                                        SigmaSign);                                                         \
  template Var<T> sky_loss(Var<T>, const std::vector<double>&, const std::vector<std::uint8_t>&,            \
                           const std::vector<bool>&);

PROSG_INSTANTIATE_LOSSES(float)
PROSG_INSTANTIATE_LOSSES(double)

}  // namespace prosg::training
