// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "prosg/numerics/tape.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace prosg::num {

/// Adam with bias correction. Moments are keyed by parameter name and exist
/// only for parameters that have been stepped at least once.
template <typename T>
struct OptimState {
  struct Moments {
    std::vector<T> first;
    std::vector<T> second;
  };

  std::map<std::string, Moments> moments;
  std::int64_t step = 0;
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Applies one Adam update to every parameter from its grad slot. All
/// gradients are checked first: a non-finite entry rejects the whole step with
/// NumericError naming the parameter, leaving parameters and state untouched.
template <typename T>
void optimizer_step(OptimState<T>& state, const std::vector<Parameter<T>*>& params);

}  // namespace prosg::num
