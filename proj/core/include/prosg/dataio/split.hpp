// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace prosg::dataio {

/// Train/test protocol tags: "full" trains on everything, "75" holds out
/// indices = 3 (mod 4), "50" holds out odd indices, "25" trains on indices = 0 (mod 4).
struct Split {
  std::vector<int> train;
  std::vector<int> test;
};

Split split_frames(const std::vector<int>& frame_indices, const std::string& tag);

/// Names accepted by split_frames.
const std::vector<std::string>& split_tags();

}  // namespace prosg::dataio
