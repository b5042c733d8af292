// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "prosg/dataio/split.hpp"

#include "prosg/error.hpp"

namespace prosg::dataio {

const std::vector<std::string>& split_tags() {
  static const std::vector<std::string> tags{"full", "75", "50", "25"};
  return tags;
}

Split split_frames(const std::vector<int>& frame_indices, const std::string& tag) {
  bool (*held_out)(int) = nullptr;
  if (tag == "full") {
    held_out = [](int) { return false; };
  } else if (tag == "75") {
    held_out = [](int i) { return i % 4 == 3; };
  } else if (tag == "50") {
    held_out = [](int i) { return i % 2 == 1; };
  } else if (tag == "25") {
    held_out = [](int i) { return i % 4 != 0; };
  } else {
    throw ConfigError("unknown split tag '" + tag + "' (use full, 75, 50 or 25)");
  }
  if (tag != "full" && frame_indices.size() < 4) {
    throw InputError("split '" + tag + "' needs at least 4 frames, got " + std::to_string(frame_indices.size()));
  }
  Split s;
  for (int i : frame_indices) (held_out(i) ? s.test : s.train).push_back(i);
  return s;
}

}  // namespace prosg::dataio
