// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "prosg/fields/encoding.hpp"
#include "prosg/numerics/mlp.hpp"
#include "prosg/scenegraph/pose.hpp"
#include "prosg/scenegraph/scene_graph.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace prosg::fields {

/// Architecture of every learned representation in one local graph.
struct FieldConfig {
  int L_position = 10;
  int L_direction = 4;
  bool include_input = true;
  bool freq_mask = true;

  std::size_t bg_hidden = 64;
  std::size_t bg_layers = 3;
  std::size_t bg_feature = 32;
  std::size_t bg_color_hidden = 32;

  std::size_t obj_hidden = 64;
  std::size_t obj_blocks = 5;
  std::size_t latent_shape = 128;
  std::size_t latent_appearance = 128;

  std::size_t crop = 64;
  std::vector<std::size_t> enc_channels{16, 32, 32, 64};

  std::size_t env_height = 32;
  std::size_t env_width = 64;

  num::Activation hidden_activation = num::Activation::Relu;
  /// Background coordinates are (x - graph centre) / scene_scale.
  double scene_scale = 40.0;

  std::size_t pos_dim() const { return encoded_dim(3, L_position, include_input); }
  std::size_t dir_dim() const { return encoded_dim(3, L_direction, include_input); }
  std::size_t encoder_flat_dim() const;
  void validate() const;
};

void to_json(nlohmann::json& j, const FieldConfig& c);
void from_json(const nlohmann::json& j, FieldConfig& c);

template <typename T>
struct BackgroundField {
  num::MlpParams<T> stage1;  ///< gamma(x) -> [sigma logit, z]
  num::MlpParams<T> stage2;  ///< [gamma(d), z] -> colour logits
};

/// Shared decoders for one decoder key. The first layer of each branch is
/// split into a per-sample part and a per-instance latent part.
template <typename T>
struct ObjectDecoder {
  num::Parameter<T> shape_x_w, shape_x_b, shape_latent_w;
  num::MlpParams<T> shape_trunk;
  num::LinearLayer<T> sigma_head;
  num::Parameter<T> app_x_w, app_x_b, app_latent_w;
  num::MlpParams<T> app_trunk;  ///< residual blocks followed by the colour head
};

/// Strided conv encoder with two linear heads (shape, appearance).
template <typename T>
struct ObjectEncoder {
  std::vector<num::Parameter<T>> conv_w;  ///< (16 * C_in, C_out) per layer
  std::vector<num::Parameter<T>> conv_b;
  num::LinearLayer<T> shape_head;
  num::LinearLayer<T> appearance_head;
};

template <typename T>
struct FarField {
  num::Parameter<T> logits;  ///< (H * W, 3) equirectangular colour logits
};

/// All trainable parameters of one local graph.
template <typename T>
struct GraphFields {
  BackgroundField<T> background;
  std::map<std::string, ObjectDecoder<T>> decoders;
  ObjectEncoder<T> encoder;
  FarField<T> far;

  std::vector<num::Parameter<T>*> params();
  std::vector<const num::Parameter<T>*> params() const;
  /// Parameters of the object branch only (decoders and encoder).
  std::vector<num::Parameter<T>*> object_params();

  template <typename U>
  GraphFields<U> cast() const;
};

template <typename T>
GraphFields<T> make_graph_fields(const FieldConfig& cfg, const std::set<std::string>& decoder_keys,
                                 std::mt19937_64& rng);

/// Fresh background and far-field, deep copies of the object branch.
template <typename T>
GraphFields<T> spawn_graph_fields(const FieldConfig& cfg, const GraphFields<T>& previous, std::mt19937_64& rng);

template <typename T>
struct FieldOutput {
  num::Var<T> sigma;  ///< (N, 1), softplus
  num::Var<T> rgb;    ///< (N, 3), sigmoid
};

template <typename T>
FieldOutput<T> background_forward(const FieldConfig& cfg, const BackgroundField<T>& f, num::Var<T> enc_x,
                                  num::Var<T> enc_d);

/// Decoder pass over N samples. `codes_s` (I, d_s) and `codes_a` (I, d_a) hold
/// per-instance codes; `instance` maps each sample row to its code row.
template <typename T>
FieldOutput<T> object_forward(const FieldConfig& cfg, const ObjectDecoder<T>& f, num::Var<T> enc_x, num::Var<T> enc_d,
                              num::Var<T> codes_s, num::Var<T> codes_a, const std::vector<std::int64_t>& instance);

/// Bilinear lookup of the four texels around each direction.
struct EnvLookup {
  std::vector<std::int64_t> texel;  ///< 4 per direction
  std::vector<double> weight;       ///< 4 per direction, summing to one
};
EnvLookup env_lookup(const FieldConfig& cfg, const std::vector<Vec3>& dirs);

/// Colour of each direction (N, 3): sigmoid of bilinearly interpolated logits.
template <typename T>
num::Var<T> farfield_forward(const FieldConfig& cfg, const FarField<T>& f, const std::vector<Vec3>& dirs,
                             num::Tape<T>& tape);

/// Encodes crops (N, crop * crop * 3) and averages encoder outputs per group;
/// returns (codes_s, codes_a) with one row per group.
template <typename T>
std::pair<num::Var<T>, num::Var<T>> encoder_forward(const FieldConfig& cfg, const ObjectEncoder<T>& f,
                                                    num::Var<T> crops,
                                                    const std::vector<std::vector<std::size_t>>& groups);

// Single-point evaluation helpers (no gradients).

struct PointSample {
  double sigma = 0.0;
  std::array<double, 3> rgb{};
};

/// Throws NumericError naming the stage on non-finite activations.
template <typename T>
PointSample background_eval(const Vec3& x, const Vec3& d, const GraphFields<T>& f, const FieldConfig& cfg,
                            const EncodingSchedule& sched, const Vec3& center = Vec3::Zero());

/// Throws ContractError when x_o lies outside [-0.7, 0.7]^3.
template <typename T>
PointSample object_eval(const Vec3& x_o, const Vec3& d_o, const LatentCodes& codes, const std::string& key,
                        const GraphFields<T>& f, const FieldConfig& cfg, const EncodingSchedule& sched);

template <typename T>
std::array<double, 3> farfield_eval(const Vec3& d, const GraphFields<T>& f, const FieldConfig& cfg);

/// Codes of one crop (crop * crop * 3 values in [0, 1], HWC order).
template <typename T>
LatentCodes encode_object(const std::vector<float>& crop, const GraphFields<T>& f, const FieldConfig& cfg);

}  // namespace prosg::fields
