// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "prosg/numerics/tensor.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace prosg::num {

/// A named trainable tensor with its gradient slot.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  /// Gradient accumulator; written through const references by Tape::backward.
  mutable std::vector<T> grad;

  Parameter() = default;
  Parameter(std::string n, Tensor<T> v) : name(std::move(n)), value(std::move(v)), grad(value.size(), T(0)) {}

  void zero_grad() const { grad.assign(value.size(), T(0)); }

  template <typename U>
  Parameter<U> cast() const {
    Parameter<U> p(name, value.template cast<U>());
    return p;
  }
};

template <typename T>
class Tape;

/// Handle to a node recorded on a tape.
template <typename T>
struct Var {
  Tape<T>* tape = nullptr;
  std::size_t id = 0;

  const Tensor<T>& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

/// Reverse-mode autodiff tape. One tape is one unit of work owned by one
/// thread; nodes are appended in evaluation order and replayed backwards.
template <typename T>
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t)>;

  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool grad_enabled() const noexcept { return grad_enabled_; }

  Var<T> constant(Tensor<T> value);
  /// Records a parameter leaf; backward() accumulates into `p.grad`. With
  /// gradients disabled the leaf is a plain constant.
  Var<T> parameter(const Parameter<T>& p);
  /// Records an op result. `fn` runs during backward only when some input requires grad.
  Var<T> record(Tensor<T> value, std::initializer_list<Var<T>> inputs, BackwardFn fn);
  Var<T> record(Tensor<T> value, const std::vector<Var<T>>& inputs, BackwardFn fn);

  const Tensor<T>& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  /// Gradient of node `id`; only valid inside a backward function for the node being replayed.
  std::span<const T> grad(std::size_t id) const { return nodes_[id].grad; }
  /// Gradient accumulator of an input, allocated lazily.
  std::span<T> accumulator(std::size_t id);

  /// Seeds d(loss)/d(loss) = 1 and replays the tape. `loss` must hold one element.
  void backward(Var<T> loss);

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor<T> value;
    std::vector<T> grad;
    bool requires_grad = false;
    BackwardFn backward;
    const Parameter<T>* param = nullptr;
  };

  void check_owner(const Var<T>& v) const;

  std::deque<Node> nodes_;
  bool grad_enabled_;
};

template <typename T>
const Tensor<T>& Var<T>::value() const {
  return tape->value(id);
}

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace prosg::num
