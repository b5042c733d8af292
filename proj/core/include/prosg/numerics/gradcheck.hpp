// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "prosg/numerics/tape.hpp"

#include <functional>
#include <string>
#include <vector>

namespace prosg::num {

/// Builds a scalar loss on the given tape from the current parameter values.
using LossBuilder = std::function<Var<double>(Tape<double>&)>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
  std::size_t below_floor = 0;       ///< non-zero scalars with max(|a|, |n|) < floor
  double max_abs_below_floor = 0.0;  ///< max |a - n| among those
};

/// Compares reverse-mode gradients with central differences
/// (f(w + eps) - f(w - eps)) / 2 eps for every scalar of every parameter.
/// Relative error is |a - n| / max(1e-12, |n|); when both |a| and |n| fall
/// below 1e-12 the entry counts as zero error. Throws NumericError if f is
/// not finite and ContractError if eps <= 0.
/// Relative error per scalar is |a - n| / max(|a|, |n|, floor).
GradCheckReport gradient_check(const LossBuilder& f, const std::vector<Parameter<double>*>& params, double eps,
                               double floor = 1e-12);

/// Maximum relative error of gradient_check.
double finite_difference_check(const LossBuilder& f, const std::vector<Parameter<double>*>& params, double eps);

}  // namespace prosg::num
