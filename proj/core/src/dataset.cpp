// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "prosg/dataio/dataset.hpp"

#include "prosg/error.hpp"
#include "prosg/scenegraph/graph_json.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>

namespace prosg::dataio {
namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "lidar I/O assumes a little-endian host");

namespace {

std::string frame_stem(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d", index);
  return buf;
}

json k_to_json(const Mat3& K) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back({K(r, 0), K(r, 1), K(r, 2)});
  return rows;
}

Mat3 k_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw InputError("K must be a 3x3 array");
  Mat3 K;
  for (int r = 0; r < 3; ++r) {
    if (!j[r].is_array() || j[r].size() != 3) throw InputError("K must be a 3x3 array");
    for (int c = 0; c < 3; ++c) K(r, c) = j[r][c].get<double>();
  }
  return K;
}

// Exact rotations pass through untouched so that written scenes reload bit for bit.
Pose clean_pose(const Pose& p, const std::string& what) {
  try {
    p.validate(1e-3);
  } catch (const ValidationError& e) {
    throw LoadError(what + ": " + e.what());
  }
  const double err = (p.R.transpose() * p.R - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (err <= 1e-12 && std::abs(p.R.determinant() - 1.0) <= 1e-12) return p;
  return orthonormalized(p, 1e-3);
}

fs::path need(const fs::path& root, const std::string& rel) {
  const fs::path p = root / rel;
  if (!fs::exists(p)) throw LoadError("missing file referenced by scene.json: " + p.string());
  return p;
}

}  // namespace

bool FrameData::operator==(const FrameData& o) const {
  return info.index == o.info.index && info.pose.R == o.info.pose.R && info.pose.t == o.info.pose.t &&
         info.camera.K == o.info.camera.K && info.camera.width == o.info.camera.width &&
         info.camera.height == o.info.camera.height && image == o.image && sky == o.sky && lidar == o.lidar &&
         masks == o.masks;
}

bool operator==(const ObjectTrack& a, const ObjectTrack& b) {
  if (a.id != b.id || a.cls != b.cls || a.size != b.size || a.poses.size() != b.poses.size()) return false;
  for (const auto& [f, p] : a.poses) {
    const auto it = b.poses.find(f);
    if (it == b.poses.end() || it->second.R != p.R || it->second.t != p.t) return false;
  }
  return true;
}

std::vector<FrameInfo> SceneDataset::frame_infos() const {
  std::vector<FrameInfo> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(f.info);
  return out;
}

std::size_t SceneDataset::position(int frame) const {
  const auto it = std::lower_bound(frames.begin(), frames.end(), frame,
                                   [](const FrameData& f, int idx) { return f.info.index < idx; });
  if (it == frames.end() || it->info.index != frame) throw LookupError("scene has no frame " + std::to_string(frame));
  return static_cast<std::size_t>(it - frames.begin());
}

void SceneDataset::validate() const {
  if (width <= 0 || height <= 0) throw LoadError("scene resolution must be positive");
  const std::size_t px = static_cast<std::size_t>(width) * height;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    const std::string tag = "frame " + std::to_string(f.info.index);
    if (i > 0 && f.info.index <= frames[i - 1].info.index) throw LoadError("frame indices must be strictly increasing");
    if (f.image.width != width || f.image.height != height || f.image.channels != 3) {
      throw LoadError(tag + ": image is " + std::to_string(f.image.width) + "x" + std::to_string(f.image.height) +
                      ", scene declares " + std::to_string(width) + "x" + std::to_string(height));
    }
    if (f.info.camera.width != width || f.info.camera.height != height) throw LoadError(tag + ": camera size mismatch");
    f.info.camera.validate();
    if (!f.sky.empty() && f.sky.size() != px) throw LoadError(tag + ": sky mask size mismatch");
    for (const auto& [id, m] : f.masks) {
      if (m.size() != px) throw LoadError(tag + ": mask of track " + std::to_string(id) + " has the wrong size");
    }
  }
  for (const auto& t : tracks) {
    if ((t.size.array() <= 0.0).any()) throw LoadError("track " + std::to_string(t.id) + " has a non-positive box size");
    for (const auto& [f, p] : t.poses) {
      (void)p;
      try {
        (void)position(f);
      } catch (const LookupError&) {
        throw LoadError("track " + std::to_string(t.id) + " is posed at frame " + std::to_string(f) +
                        ", which is not in the frame list");
      }
    }
  }
}

std::vector<Vec3> read_lidar(const fs::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw LoadError("cannot read lidar file " + path.string());
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes % 12 != 0) throw LoadError("lidar file " + path.string() + " is not a list of float32 triples");
  in.seekg(0);
  std::vector<float> raw(bytes / 4);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw LoadError("truncated lidar file " + path.string());
  std::vector<Vec3> pts(raw.size() / 3);
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = Vec3(raw[3 * i], raw[3 * i + 1], raw[3 * i + 2]);
  return pts;
}

void write_lidar(const fs::path& path, const std::vector<Vec3>& points) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::vector<float> raw;
  raw.reserve(points.size() * 3);
  for (const auto& p : points)
    for (int k = 0; k < 3; ++k) raw.push_back(static_cast<float>(p[k]));
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 4));
  if (!out) throw LoadError("cannot write lidar file " + path.string());
}

std::vector<std::uint8_t> read_mask(const fs::path& path, int width, int height) {
  const Image img = read_png(path, 1);
  if (img.width != width || img.height != height) {
    throw LoadError("mask " + path.string() + " is " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                    ", expected " + std::to_string(width) + "x" + std::to_string(height));
  }
  std::vector<std::uint8_t> m(img.data.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = img.data[i] > 0.5f ? 1 : 0;
  return m;
}

void write_mask(const fs::path& path, const std::vector<std::uint8_t>& mask, int width, int height) {
  Image img(width, height, 1);
  for (std::size_t i = 0; i < mask.size(); ++i) img.data[i] = mask[i] ? 1.0f : 0.0f;
  write_png(path, img);
}

SceneDataset load_scene(const fs::path& root) {
  const fs::path manifest = root / "scene.json";
  std::ifstream in(manifest);
  if (!in) throw LoadError("no scene manifest at " + manifest.string());
  SceneDataset scene;
  try {
    const json j = json::parse(in);
    if (j.value("schema", std::string()) != kSceneSchema) {
      throw LoadError(manifest.string() + ": expected schema \"" + std::string(kSceneSchema) + "\"");
    }
    scene.name = j.value("name", std::string());
    scene.width = j.at("width").get<int>();
    scene.height = j.at("height").get<int>();
    for (const auto& jf : j.at("frames")) {
      FrameData f;
      f.info.index = jf.at("index").get<int>();
      const std::string tag = "frame " + std::to_string(f.info.index);
      f.info.pose = clean_pose(pose_from_json(jf.at("pose")), manifest.string() + " " + tag + " pose");
      f.info.camera.K = k_from_json(jf.at("K"));
      f.info.camera.width = scene.width;
      f.info.camera.height = scene.height;
      f.image = read_png(need(root, jf.at("image").get<std::string>()), 3);
      if (jf.contains("sky_mask")) {
        f.sky = read_mask(need(root, jf["sky_mask"].get<std::string>()), scene.width, scene.height);
      }
      if (jf.contains("lidar")) f.lidar = read_lidar(need(root, jf["lidar"].get<std::string>()));
      if (jf.contains("instance_masks")) {
        for (const auto& [id, rel] : jf["instance_masks"].items()) {
          f.masks[std::stoi(id)] = read_mask(need(root, rel.get<std::string>()), scene.width, scene.height);
        }
      }
      scene.frames.push_back(std::move(f));
    }
    for (const auto& jt : j.value("tracks", json::array())) {
      ObjectTrack t;
      t.id = jt.at("id").get<int>();
      t.cls = jt.at("class").get<std::string>();
      const auto size = jt.at("size").get<std::vector<double>>();
      if (size.size() != 3) throw LoadError("track " + std::to_string(t.id) + ": size needs 3 values");
      t.size = Vec3(size[0], size[1], size[2]);
      for (const auto& [frame, jp] : jt.at("poses").items()) {
        t.poses[std::stoi(frame)] =
            clean_pose(pose_from_json(jp), "track " + std::to_string(t.id) + " pose at frame " + frame);
      }
      scene.tracks.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw LoadError("malformed " + manifest.string() + ": " + e.what());
  } catch (const std::invalid_argument&) {
    throw LoadError("malformed " + manifest.string() + ": non-numeric key");
  } catch (const InputError& e) {
    throw LoadError(manifest.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw LoadError(manifest.string() + ": " + e.what());
  }
  scene.validate();
  return scene;
}

void write_scene(const SceneDataset& scene, const fs::path& root) {
  scene.validate();
  fs::create_directories(root);
  json j;
  j["schema"] = kSceneSchema;
  j["name"] = scene.name;
  j["width"] = scene.width;
  j["height"] = scene.height;
  j["frames"] = json::array();
  for (const auto& f : scene.frames) {
    const std::string stem = frame_stem(f.info.index);
    json jf;
    jf["index"] = f.info.index;
    jf["pose"] = pose_to_json(f.info.pose);
    jf["K"] = k_to_json(f.info.camera.K);
    jf["image"] = "images/" + stem + ".png";
    write_png(root / jf["image"].get<std::string>(), f.image);
    if (!f.sky.empty()) {
      jf["sky_mask"] = "sky/" + stem + ".png";
      write_mask(root / jf["sky_mask"].get<std::string>(), f.sky, scene.width, scene.height);
    }
    if (!f.lidar.empty()) {
      jf["lidar"] = "lidar/" + stem + ".bin";
      write_lidar(root / jf["lidar"].get<std::string>(), f.lidar);
    }
    if (!f.masks.empty()) {
      json jm = json::object();
      for (const auto& [id, m] : f.masks) {
        const std::string rel = "masks/" + stem + "_" + std::to_string(id) + ".png";
        write_mask(root / rel, m, scene.width, scene.height);
        jm[std::to_string(id)] = rel;
      }
      jf["instance_masks"] = jm;
    }
    j["frames"].push_back(jf);
  }
  j["tracks"] = json::array();
  for (const auto& t : scene.tracks) {
    json poses = json::object();
    for (const auto& [f, p] : t.poses) poses[std::to_string(f)] = pose_to_json(p);
    j["tracks"].push_back({{"id", t.id}, {"class", t.cls}, {"size", {t.size.x(), t.size.y(), t.size.z()}}, {"poses", poses}});
  }
  std::ofstream out(root / "scene.json");
  out << j.dump(1) << "\n";
  if (!out) throw LoadError("cannot write " + (root / "scene.json").string());
}

bool has_instance(const FrameData& frame, int track) {
  const auto it = frame.masks.find(track);
  return it != frame.masks.end() && std::any_of(it->second.begin(), it->second.end(), [](auto v) { return v != 0; });
}

std::vector<float> instance_crop(const FrameData& frame, int track, std::size_t size) {
  const auto it = frame.masks.find(track);
  const std::string tag = "track " + std::to_string(track) + " at frame " + std::to_string(frame.info.index);
  if (it == frame.masks.end()) throw InputError(tag + " has no instance mask");
  const auto& mask = it->second;
  const int W = frame.image.width, H = frame.image.height;
  int x0 = W, y0 = H, x1 = -1, y1 = -1;
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      if (mask[static_cast<std::size_t>(y) * W + x]) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
  if (x1 < 0) throw InputError(tag + " has an empty instance mask");

  // Bilinear resampling of the masked image over the bounding box.
  auto masked = [&](int x, int y, int c) -> float {
    x = std::clamp(x, x0, x1);
    y = std::clamp(y, y0, y1);
    return mask[static_cast<std::size_t>(y) * W + x] ? frame.image.at(x, y, c) : 0.0f;
  };
  const double bw = x1 - x0 + 1, bh = y1 - y0 + 1;
  std::vector<float> out(size * size * 3);
  for (std::size_t i = 0; i < size; ++i) {
    const double sy = y0 + (i + 0.5) * bh / static_cast<double>(size) - 0.5;
    const int iy = static_cast<int>(std::floor(sy));
    const double fy = sy - iy;
    for (std::size_t j = 0; j < size; ++j) {
      const double sx = x0 + (j + 0.5) * bw / static_cast<double>(size) - 0.5;
      const int ix = static_cast<int>(std::floor(sx));
      const double fx = sx - ix;
      for (int c = 0; c < 3; ++c) {
        const double v = (1 - fy) * ((1 - fx) * masked(ix, iy, c) + fx * masked(ix + 1, iy, c)) +
                         fy * ((1 - fx) * masked(ix, iy + 1, c) + fx * masked(ix + 1, iy + 1, c));
        out[(i * size + j) * 3 + c] = static_cast<float>(v);
      }
    }
  }
  return out;
}

}  // namespace prosg::dataio
