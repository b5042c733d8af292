// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "prosg/rendering/composite.hpp"

#include "prosg/error.hpp"

#include <cmath>

namespace prosg::rendering {

RenderOutput composite(const CompositeInput& in, DepthMode mode, int far_node) {
  const std::size_t n = in.t.size();
  if (in.delta.size() != n || in.sigma.size() != n || in.rgb.size() != n || (!in.node.empty() && in.node.size() != n)) {
    throw ShapeError("composite: per-sample arrays differ in length");
  }
  RenderOutput out;
  out.weights.resize(n);
  double optical = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = in.sigma[i], d = in.delta[i];
    if (!(s >= 0.0) || !(d >= 0.0)) throw ContractError("composite needs sigma >= 0 and delta >= 0");
    const double sd = s * d;
    const double trans = std::exp(-optical);
    const double alpha = 1.0 - std::exp(-sd);
    const double w = trans * alpha;
    optical += sd;
    out.weights[i] = w;
    for (int c = 0; c < 3; ++c) out.color[c] += w * in.rgb[i][c];
    out.depth += w * (mode == DepthMode::Distance ? in.t[i] : d);
    if (!in.node.empty()) {
      out.node_weight[in.node[i]] += w;
      auto& nc = out.node_color[in.node[i]];
      for (int c = 0; c < 3; ++c) nc[c] += w * in.rgb[i][c];
    }
  }
  out.T_end = std::exp(-optical);
  if (in.far_tail) {
    for (int c = 0; c < 3; ++c) out.color[c] += out.T_end * in.far[c];
    if (!in.node.empty() || n == 0) {
      out.node_weight[far_node] += out.T_end;
      auto& nc = out.node_color[far_node];
      for (int c = 0; c < 3; ++c) nc[c] += out.T_end * in.far[c];
    }
  }
  return out;
}

}  // namespace prosg::rendering
