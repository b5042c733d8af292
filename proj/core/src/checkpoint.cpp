// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "prosg/numerics/checkpoint.hpp"

#include "prosg/error.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace prosg::num {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr std::size_t kMagicLen = 6;

template <typename T>
constexpr const char* dtype_name() {
  return sizeof(T) == 4 ? "f32" : "f64";
}

}  // namespace

template <typename T>
void write_checkpoint(const std::filesystem::path& path, const std::string& module,
                      const std::vector<const Parameter<T>*>& params, const nlohmann::json& meta) {
  std::vector<NamedParam<T>> named;
  named.reserve(params.size());
  for (const auto* p : params) named.emplace_back(p->name, p);
  write_checkpoint<T>(path, module, named, meta);
}

template <typename T>
void write_checkpoint(const std::filesystem::path& path, const std::string& module,
                      const std::vector<NamedParam<T>>& params, const nlohmann::json& meta) {
  nlohmann::json header;
  header["module"] = module;
  header["meta"] = meta.is_null() ? nlohmann::json::object() : meta;
  header["tensors"] = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, p] : params) {
    const std::uint64_t nbytes = p->value.size() * sizeof(T);
    header["tensors"].push_back({{"name", name},
                                 {"shape", p->value.shape()},
                                 {"dtype", dtype_name<T>()},
                                 {"offset", offset},
                                 {"nbytes", nbytes}});
    offset += nbytes;
  }
  const std::string text = header.dump();
  const std::uint64_t header_len = text.size();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot open checkpoint for writing: " + path.string());
  out.write(kCheckpointMagic, kMagicLen);
  out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, p] : params) {
    out.write(reinterpret_cast<const char*>(p->value.data().data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(T)));
  }
  if (!out) throw LoadError("failed writing checkpoint: " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open checkpoint: " + path.string());
  char magic[kMagicLen];
  in.read(magic, kMagicLen);
  if (!in || std::memcmp(magic, kCheckpointMagic, kMagicLen) != 0) {
    throw LoadError("not a PROSG1 checkpoint: " + path.string());
  }
  std::uint64_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
  if (!in || header_len > (1ull << 32)) throw LoadError("corrupt checkpoint header length: " + path.string());
  std::string text(header_len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw LoadError("truncated checkpoint header: " + path.string());

  Checkpoint ckpt;
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    const auto header = nlohmann::json::parse(text);
    ckpt.module = header.at("module").get<std::string>();
    ckpt.meta = header.value("meta", nlohmann::json::object());
    for (const auto& t : header.at("tensors")) {
      StoredTensor st;
      st.shape = t.at("shape").get<Shape>();
      st.dtype = t.at("dtype").get<std::string>();
      const auto offset = t.at("offset").get<std::uint64_t>();
      const auto nbytes = t.at("nbytes").get<std::uint64_t>();
      const std::size_t width = st.dtype == "f32" ? 4 : st.dtype == "f64" ? 8 : 0;
      if (width == 0) throw LoadError("unknown dtype '" + st.dtype + "' in " + path.string());
      if (offset + nbytes > raw.size() || nbytes != element_count(st.shape) * width) {
        throw LoadError("tensor '" + t.at("name").get<std::string>() + "' out of bounds in " + path.string());
      }
      const std::size_t n = nbytes / width;
      st.values.resize(n);
      const char* src = raw.data() + offset;
      for (std::size_t i = 0; i < n; ++i) {
        if (width == 4) {
          float f;
          std::memcpy(&f, src + i * 4, 4);
          st.values[i] = f;
        } else {
          std::memcpy(&st.values[i], src + i * 8, 8);
        }
      }
      ckpt.tensors.emplace(t.at("name").get<std::string>(), std::move(st));
    }
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("malformed checkpoint header in " + path.string() + ": " + e.what());
  }
  return ckpt;
}

template <typename T>
void restore_params(const Checkpoint& ckpt, const std::vector<Parameter<T>*>& params, const std::string& prefix) {
  for (Parameter<T>* p : params) {
    const auto it = ckpt.tensors.find(prefix + p->name);
    if (it == ckpt.tensors.end()) throw LookupError("checkpoint has no tensor '" + prefix + p->name + "'");
    if (it->second.shape != p->value.shape()) {
      throw ShapeError("checkpoint tensor '" + prefix + p->name + "' has shape " + to_string(it->second.shape) +
                       ", parameter expects " + to_string(p->value.shape()));
    }
    for (std::size_t i = 0; i < p->value.size(); ++i) p->value[i] = static_cast<T>(it->second.values[i]);
    p->zero_grad();
  }
}

template <typename T>
std::uint64_t param_checksum(const std::vector<const Parameter<T>*>& params) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto* p : params) {
    mix(p->name.data(), p->name.size());
    mix(p->value.data().data(), p->value.size() * sizeof(T));
  }
  return h;
}

template std::uint64_t param_checksum(const std::vector<const Parameter<float>*>&);
template std::uint64_t param_checksum(const std::vector<const Parameter<double>*>&);
template void write_checkpoint(const std::filesystem::path&, const std::string&,
                               const std::vector<const Parameter<float>*>&, const nlohmann::json&);
template void write_checkpoint(const std::filesystem::path&, const std::string&,
                               const std::vector<NamedParam<float>>&, const nlohmann::json&);
template void write_checkpoint(const std::filesystem::path&, const std::string&,
                               const std::vector<NamedParam<double>>&, const nlohmann::json&);
template void write_checkpoint(const std::filesystem::path&, const std::string&,
                               const std::vector<const Parameter<double>*>&, const nlohmann::json&);
template void restore_params(const Checkpoint&, const std::vector<Parameter<float>*>&, const std::string&);
template void restore_params(const Checkpoint&, const std::vector<Parameter<double>*>&, const std::string&);

}  // namespace prosg::num
