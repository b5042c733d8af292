// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "prosg/numerics/adam.hpp"

#include "prosg/error.hpp"

#include <cmath>

namespace prosg::num {

template <typename T>
void optimizer_step(OptimState<T>& state, const std::vector<Parameter<T>*>& params) {
  if (state.step < 0) throw ContractError("optimizer step count is negative");
  for (const Parameter<T>* p : params) {
    if (p->grad.size() != p->value.size()) {
      throw ShapeError("gradient of '" + p->name + "' has " + std::to_string(p->grad.size()) + " entries, expected " +
                       std::to_string(p->value.size()));
    }
    for (T g : p->grad) {
      if (!std::isfinite(g)) throw NumericError("non-finite gradient in parameter '" + p->name + "'");
    }
  }

  const std::int64_t step = state.step + 1;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(step));
  const T b1 = static_cast<T>(state.beta1), b2 = static_cast<T>(state.beta2);
  const T lr = static_cast<T>(state.learning_rate);
  const T eps = static_cast<T>(state.epsilon);
  const T inv_c1 = static_cast<T>(1.0 / c1), inv_c2 = static_cast<T>(1.0 / c2);

  for (Parameter<T>* p : params) {
    auto& mo = state.moments[p->name];
    if (mo.first.size() != p->value.size()) {
      mo.first.assign(p->value.size(), T(0));
      mo.second.assign(p->value.size(), T(0));
    }
    auto w = p->value.data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const T g = p->grad[i];
      mo.first[i] = b1 * mo.first[i] + (T(1) - b1) * g;
      mo.second[i] = b2 * mo.second[i] + (T(1) - b2) * g * g;
      const T m_hat = mo.first[i] * inv_c1;
      const T v_hat = mo.second[i] * inv_c2;
      w[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
  state.step = step;
}

template void optimizer_step(OptimState<float>&, const std::vector<Parameter<float>*>&);
template void optimizer_step(OptimState<double>&, const std::vector<Parameter<double>*>&);

}  // namespace prosg::num
