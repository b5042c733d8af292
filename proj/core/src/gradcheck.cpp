// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "prosg/numerics/gradcheck.hpp"

#include "prosg/error.hpp"

#include <algorithm>
#include <cmath>

namespace prosg::num {
namespace {

double evaluate(const LossBuilder& f) {
  Tape<double> tape(false);
  const double v = f(tape).value().item();
  if (!std::isfinite(v)) throw NumericError("gradient check: loss is not finite (" + std::to_string(v) + ")");
  return v;
}

}  // namespace

GradCheckReport gradient_check(const LossBuilder& f, const std::vector<Parameter<double>*>& params, double eps,
                               double floor) {
  if (!(eps > 0.0) || !(floor > 0.0)) throw ContractError("gradient check needs eps > 0 and floor > 0");
  for (auto* p : params) p->zero_grad();
  {
    Tape<double> tape;
    Var<double> loss = f(tape);
    if (!std::isfinite(loss.value().item())) throw NumericError("gradient check: loss is not finite");
    tape.backward(loss);
  }

  GradCheckReport report;
  for (auto* p : params) {
    const std::vector<double> analytic = p->grad;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double w = p->value[i];
      p->value[i] = w + eps;
      const double fp = evaluate(f);
      p->value[i] = w - eps;
      const double fm = evaluate(f);
      p->value[i] = w;
      const double n = (fp - fm) / (2.0 * eps);
      const double a = analytic[i];
      const double err = std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
      ++report.checked;
      const double scale = std::max(std::abs(a), std::abs(n));
      if (scale > 0.0 && scale < floor) {
        ++report.below_floor;
        report.max_abs_below_floor = std::max(report.max_abs_below_floor, std::abs(a - n));
      }
      if (err > report.max_rel_error || report.worst_param.empty()) {
        report.max_rel_error = err;
        report.worst_param = p->name;
        report.worst_index = i;
        report.analytic = a;
        report.numeric = n;
      }
    }
  }
  return report;
}

double finite_difference_check(const LossBuilder& f, const std::vector<Parameter<double>*>& params, double eps) {
  return gradient_check(f, params, eps).max_rel_error;
}

}  // namespace prosg::num
