// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "prosg/numerics/mlp.hpp"

#include "prosg/error.hpp"

#include <cmath>

namespace prosg::num {

Activation activation_from_string(const std::string& name) {
  if (name == "none") return Activation::None;
  if (name == "relu") return Activation::Relu;
  if (name == "softplus") return Activation::Softplus;
  if (name == "sigmoid") return Activation::Sigmoid;
  throw ConfigError("unknown activation '" + name + "'");
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::None:
      return "none";
    case Activation::Relu:
      return "relu";
    case Activation::Softplus:
      return "softplus";
    case Activation::Sigmoid:
      return "sigmoid";
  }
  return "none";
}

template <typename T>
Var<T> activate(Var<T> x, Activation a) {
  switch (a) {
    case Activation::None:
      return x;
    case Activation::Relu:
      return relu(x);
    case Activation::Softplus:
      return softplus(x);
    case Activation::Sigmoid:
      return sigmoid(x);
  }
  return x;
}

template <typename T>
void MlpParams<T>::validate() const {
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& l = layers[k];
    if (l.bias.value.size() != l.out_dim()) {
      throw ShapeError("layer " + std::to_string(k) + ": bias " + to_string(l.bias.value.shape()) +
                       " does not match weight " + to_string(l.weight.value.shape()));
    }
    if (k > 0 && layers[k - 1].out_dim() != l.in_dim()) {
      throw ShapeError("layer " + std::to_string(k) + " expects width " + std::to_string(l.in_dim()) +
                       " but layer " + std::to_string(k - 1) + " produces " + std::to_string(layers[k - 1].out_dim()));
    }
    if (l.residual && (k == 0 || layers[k - 1].in_dim() != l.out_dim())) {
      throw ShapeError("layer " + std::to_string(k) + ": residual skip needs matching widths");
    }
  }
}

template <typename T>
LinearLayer<T> make_linear(const std::string& name, const LayerSpec& spec, std::mt19937_64& rng) {
  Tensor<T> w(Shape{spec.in, spec.out});
  if (spec.init_gain != 0.0) {
    const double bound = spec.init_gain * std::sqrt(6.0 / static_cast<double>(std::max<std::size_t>(spec.in, 1)));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& x : w.data()) x = static_cast<T>(dist(rng));
  }
  LinearLayer<T> layer;
  layer.weight = Parameter<T>(name + ".weight", std::move(w));
  layer.bias = Parameter<T>(name + ".bias", Tensor<T>(Shape{spec.out}));
  layer.activation = spec.activation;
  layer.residual = spec.residual;
  return layer;
}

template <typename T>
MlpParams<T> make_mlp(const std::string& prefix, const std::vector<LayerSpec>& specs, std::mt19937_64& rng) {
  MlpParams<T> mlp;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    mlp.layers.push_back(make_linear<T>(prefix + ".l" + std::to_string(k), specs[k], rng));
  }
  mlp.validate();
  return mlp;
}

std::vector<LayerSpec> chain_specs(std::size_t in, std::size_t hidden, std::size_t hidden_layers, std::size_t out,
                                   Activation hidden_act, Activation out_act) {
  std::vector<LayerSpec> specs;
  std::size_t width = in;
  for (std::size_t k = 0; k < hidden_layers; ++k) {
    specs.push_back({width, hidden, hidden_act, false, 1.0});
    width = hidden;
  }
  specs.push_back({width, out, out_act, false, 0.5});
  return specs;
}

std::vector<LayerSpec> residual_specs(std::size_t in, std::size_t hidden, std::size_t blocks, std::size_t out,
                                      Activation hidden_act, Activation out_act) {
  std::vector<LayerSpec> specs;
  specs.push_back({in, hidden, hidden_act, false, 1.0});
  for (std::size_t b = 0; b < blocks; ++b) {
    specs.push_back({hidden, hidden, hidden_act, false, 1.0});
    // Second layer of the block starts small so each block begins near identity.
    specs.push_back({hidden, hidden, hidden_act, true, 0.1});
  }
  specs.push_back({hidden, out, out_act, false, 0.5});
  return specs;
}

template <typename T>
Var<T> forward(const MlpParams<T>& params, Var<T> input) {
  if (params.layers.empty()) return input;
  if (input.cols() != params.in_dim()) {
    throw ShapeError("mlp input " + to_string(input.shape()) + " does not match first layer in-dim " +
                     std::to_string(params.in_dim()));
  }
  Tape<T>& tape = *input.tape;
  Var<T> x = input;
  Var<T> prev_input = input;
  for (const auto& layer : params.layers) {
    Var<T> w = tape.parameter(layer.weight);
    Var<T> b = tape.parameter(layer.bias);
    Var<T> pre = add(matmul(x, w), b);
    if (layer.residual) pre = add(pre, prev_input);
    prev_input = x;
    x = activate(pre, layer.activation);
  }
  return x;
}

template struct MlpParams<float>;
template struct MlpParams<double>;
template Var<float> activate(Var<float>, Activation);
template Var<double> activate(Var<double>, Activation);
template LinearLayer<float> make_linear(const std::string&, const LayerSpec&, std::mt19937_64&);
template LinearLayer<double> make_linear(const std::string&, const LayerSpec&, std::mt19937_64&);
template MlpParams<float> make_mlp(const std::string&, const std::vector<LayerSpec>&, std::mt19937_64&);
template MlpParams<double> make_mlp(const std::string&, const std::vector<LayerSpec>&, std::mt19937_64&);
template Var<float> forward(const MlpParams<float>&, Var<float>);
template Var<double> forward(const MlpParams<double>&, Var<double>);

}  // namespace prosg::num
