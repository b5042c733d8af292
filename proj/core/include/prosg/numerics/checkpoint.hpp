// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "prosg/numerics/tape.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace prosg::num {

/// Container layout:
///   "PROSG1" | u64 little-endian header length | JSON header | raw tensor bytes
/// The header lists module name, free-form metadata, and per-tensor name,
/// shape, dtype ("f32" | "f64"), byte offset and byte length relative to the
/// start of the raw section. Tensor data is little-endian.
inline constexpr char kCheckpointMagic[] = "PROSG1";

struct StoredTensor {
  Shape shape;
  std::string dtype;
  std::vector<double> values;
};

struct Checkpoint {
  std::string module;
  nlohmann::json meta = nlohmann::json::object();
  std::map<std::string, StoredTensor> tensors;
};

/// Parameter stored under an explicit tensor name.
template <typename T>
using NamedParam = std::pair<std::string, const Parameter<T>*>;

template <typename T>
void write_checkpoint(const std::filesystem::path& path, const std::string& module,
                      const std::vector<NamedParam<T>>& params, const nlohmann::json& meta = {});

/// Stores each parameter under its own name.
template <typename T>
void write_checkpoint(const std::filesystem::path& path, const std::string& module,
                      const std::vector<const Parameter<T>*>& params, const nlohmann::json& meta = {});

/// Throws LoadError naming the path on a bad magic, truncated data, or malformed header.
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Copies stored values into parameters with matching names; throws LookupError
/// for a missing name and ShapeError for a shape mismatch.
template <typename T>
void restore_params(const Checkpoint& ckpt, const std::vector<Parameter<T>*>& params, const std::string& prefix = "");

/// FNV-1a over parameter names and raw value bytes.
template <typename T>
std::uint64_t param_checksum(const std::vector<const Parameter<T>*>& params);

}  // namespace prosg::num
