// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "prosg/numerics/ops.hpp"
#include "prosg/numerics/tape.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace prosg::num {

enum class Activation { None, Relu, Softplus, Sigmoid };

Activation activation_from_string(const std::string& name);
std::string to_string(Activation a);

template <typename T>
Var<T> activate(Var<T> x, Activation a);

/// Fully connected layer: y = act(x W + b [+ residual]) with W of shape (in, out).
template <typename T>
struct LinearLayer {
  Parameter<T> weight;
  Parameter<T> bias;
  Activation activation = Activation::None;
  /// When set, the input of the previous layer is added before the activation,
  /// closing a two-layer residual block.
  bool residual = false;

  std::size_t in_dim() const { return weight.value.rows(); }
  std::size_t out_dim() const { return weight.value.cols(); }
};

template <typename T>
struct MlpParams {
  std::vector<LinearLayer<T>> layers;

  std::size_t in_dim() const { return layers.empty() ? 0 : layers.front().in_dim(); }
  std::size_t out_dim() const { return layers.empty() ? 0 : layers.back().out_dim(); }

  /// Checks layer composition and residual compatibility; throws ShapeError.
  void validate() const;

  template <typename F>
  void for_each_param(F&& fn) {
    for (auto& l : layers) {
      fn(l.weight);
      fn(l.bias);
    }
  }
  template <typename F>
  void for_each_param(F&& fn) const {
    for (const auto& l : layers) {
      fn(l.weight);
      fn(l.bias);
    }
  }
};

/// Layer description used to build an MlpParams.
struct LayerSpec {
  std::size_t in = 0, out = 0;
  Activation activation = Activation::Relu;
  bool residual = false;
  /// Multiplier on the He-uniform init bound; zero gives an all-zero layer.
  double init_gain = 1.0;
};

template <typename T>
LinearLayer<T> make_linear(const std::string& name, const LayerSpec& spec, std::mt19937_64& rng);

template <typename T>
MlpParams<T> make_mlp(const std::string& prefix, const std::vector<LayerSpec>& specs, std::mt19937_64& rng);

/// Plain chain: input -> hidden layers -> output, hidden activation on every layer but the last.
std::vector<LayerSpec> chain_specs(std::size_t in, std::size_t hidden, std::size_t hidden_layers, std::size_t out,
                                   Activation hidden_act, Activation out_act);

/// Input projection, `blocks` two-layer residual blocks of width `hidden`, then output head.
std::vector<LayerSpec> residual_specs(std::size_t in, std::size_t hidden, std::size_t blocks, std::size_t out,
                                      Activation hidden_act, Activation out_act);

/// Forward pass recorded on `tape`. Throws ShapeError naming the input shape
/// and the first layer's expected width on mismatch.
template <typename T>
Var<T> forward(const MlpParams<T>& params, Var<T> input);

}  // namespace prosg::num
