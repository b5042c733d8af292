// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "prosg/dataio/image_io.hpp"
#include "prosg/scenegraph/scene_graph.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace prosg::dataio {

inline constexpr const char* kSceneSchema = "prosg-scene/1";

/// One frame with everything it references loaded into memory.
struct FrameData {
  FrameInfo info;
  Image image;
  /// Row-major, 1 = sky. Empty when the frame has no sky mask.
  std::vector<std::uint8_t> sky;
  /// World-space lidar points.
  std::vector<Vec3> lidar;
  /// Track id -> row-major instance mask (1 = object).
  std::map<int, std::vector<std::uint8_t>> masks;

  bool operator==(const FrameData& o) const;
};

struct SceneDataset {
  std::string name;
  int width = 0;
  int height = 0;
  std::vector<FrameData> frames;
  std::vector<ObjectTrack> tracks;

  std::vector<FrameInfo> frame_infos() const;
  /// Position of a frame index in `frames`; throws LookupError.
  std::size_t position(int frame) const;
  const FrameData& frame(int index) const { return frames[position(index)]; }
  /// Checks resolutions, frame ordering and that every track pose names a frame.
  void validate() const;
};

bool operator==(const ObjectTrack& a, const ObjectTrack& b);

/// Reads `root/scene.json` and every file it references. Rotations within 1e-3
/// of orthonormal are projected back onto SO(3); others raise LoadError.
SceneDataset load_scene(const std::filesystem::path& root);

/// Writes the manifest and all referenced files under `root`.
void write_scene(const SceneDataset& scene, const std::filesystem::path& root);

/// Lidar files: little-endian float32 x, y, z triples.
std::vector<Vec3> read_lidar(const std::filesystem::path& path);
void write_lidar(const std::filesystem::path& path, const std::vector<Vec3>& points);

/// 8-bit mask PNG, nonzero = set.
std::vector<std::uint8_t> read_mask(const std::filesystem::path& path, int width, int height);
void write_mask(const std::filesystem::path& path, const std::vector<std::uint8_t>& mask, int width, int height);

/// The instance's mask bounding box resampled to `size` x `size` (HWC, RGB),
/// pixels outside the mask zeroed. Throws InputError when the mask is empty or absent.
std::vector<float> instance_crop(const FrameData& frame, int track, std::size_t size);
/// True when the frame has a non-empty mask for `track`.
bool has_instance(const FrameData& frame, int track);

}  // namespace prosg::dataio
