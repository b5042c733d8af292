// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "prosg/fields/fields.hpp"

#include "prosg/error.hpp"

#include <cmath>
#include <numbers>

namespace prosg::fields {

using num::Activation;
using num::LayerSpec;
using num::Parameter;
using num::Tape;
using num::Tensor;
using num::Var;

std::size_t FieldConfig::encoder_flat_dim() const {
  std::size_t side = crop >> enc_channels.size();
  return side * side * (enc_channels.empty() ? 3 : enc_channels.back());
}

void FieldConfig::validate() const {
  if (L_position < 1 || L_direction < 1) throw ConfigError("encoding band counts must be >= 1");
  if (bg_layers < 1 || bg_hidden < 1 || bg_feature < 1 || bg_color_hidden < 1) {
    throw ConfigError("background widths and depth must be >= 1");
  }
  if (obj_hidden < 1 || latent_shape < 1 || latent_appearance < 1) throw ConfigError("object widths must be >= 1");
  if (enc_channels.empty()) throw ConfigError("encoder needs at least one conv layer");
  if (crop == 0 || crop % (std::size_t{1} << enc_channels.size()) != 0) {
    throw ConfigError("encoder crop size must be divisible by 2^(conv layers)");
  }
  if (env_height < 2 || env_width < 2) throw ConfigError("environment map must be at least 2x2");
  if (!(scene_scale > 0.0)) throw ConfigError("scene_scale must be positive");
}

void to_json(nlohmann::json& j, const FieldConfig& c) {
  j = {{"L_position", c.L_position},
       {"L_direction", c.L_direction},
       {"include_input", c.include_input},
       {"freq_mask", c.freq_mask},
       {"bg_hidden", c.bg_hidden},
       {"bg_layers", c.bg_layers},
       {"bg_feature", c.bg_feature},
       {"bg_color_hidden", c.bg_color_hidden},
       {"obj_hidden", c.obj_hidden},
       {"obj_blocks", c.obj_blocks},
       {"latent_shape", c.latent_shape},
       {"latent_appearance", c.latent_appearance},
       {"crop", c.crop},
       {"enc_channels", c.enc_channels},
       {"env_height", c.env_height},
       {"env_width", c.env_width},
       {"hidden_activation", num::to_string(c.hidden_activation)},
       {"scene_scale", c.scene_scale}};
}

void from_json(const nlohmann::json& j, FieldConfig& c) {
  FieldConfig d;
  c.L_position = j.value("L_position", d.L_position);
  c.L_direction = j.value("L_direction", d.L_direction);
  c.include_input = j.value("include_input", d.include_input);
  c.freq_mask = j.value("freq_mask", d.freq_mask);
  c.bg_hidden = j.value("bg_hidden", d.bg_hidden);
  c.bg_layers = j.value("bg_layers", d.bg_layers);
  c.bg_feature = j.value("bg_feature", d.bg_feature);
  c.bg_color_hidden = j.value("bg_color_hidden", d.bg_color_hidden);
  c.obj_hidden = j.value("obj_hidden", d.obj_hidden);
  c.obj_blocks = j.value("obj_blocks", d.obj_blocks);
  c.latent_shape = j.value("latent_shape", d.latent_shape);
  c.latent_appearance = j.value("latent_appearance", d.latent_appearance);
  c.crop = j.value("crop", d.crop);
  c.enc_channels = j.value("enc_channels", d.enc_channels);
  c.env_height = j.value("env_height", d.env_height);
  c.env_width = j.value("env_width", d.env_width);
  c.hidden_activation = num::activation_from_string(j.value("hidden_activation", std::string("relu")));
  c.scene_scale = j.value("scene_scale", d.scene_scale);
}

// ---------------------------------------------------------------------------
// Parameter bookkeeping

namespace {

template <typename T, typename F>
void visit(BackgroundField<T>& b, F&& fn) {
  b.stage1.for_each_param(fn);
  b.stage2.for_each_param(fn);
}

template <typename T, typename F>
void visit(ObjectDecoder<T>& d, F&& fn) {
  fn(d.shape_x_w);
  fn(d.shape_x_b);
  fn(d.shape_latent_w);
  d.shape_trunk.for_each_param(fn);
  fn(d.sigma_head.weight);
  fn(d.sigma_head.bias);
  fn(d.app_x_w);
  fn(d.app_x_b);
  fn(d.app_latent_w);
  d.app_trunk.for_each_param(fn);
}

template <typename T, typename F>
void visit(ObjectEncoder<T>& e, F&& fn) {
  for (std::size_t i = 0; i < e.conv_w.size(); ++i) {
    fn(e.conv_w[i]);
    fn(e.conv_b[i]);
  }
  fn(e.shape_head.weight);
  fn(e.shape_head.bias);
  fn(e.appearance_head.weight);
  fn(e.appearance_head.bias);
}

template <typename T, typename F>
void visit_all(GraphFields<T>& g, F&& fn) {
  visit(g.background, fn);
  for (auto& [k, d] : g.decoders) visit(d, fn);
  visit(g.encoder, fn);
  fn(g.far.logits);
}

template <typename T>
Parameter<T> weight(const std::string& name, std::size_t in, std::size_t out, double gain, std::mt19937_64& rng) {
  auto l = num::make_linear<T>(name, {in, out, Activation::None, false, gain}, rng);
  return std::move(l.weight);
}

template <typename T>
Parameter<T> zeros(const std::string& name, num::Shape shape) {
  return Parameter<T>(name, Tensor<T>(std::move(shape)));
}

std::vector<LayerSpec> block_specs(std::size_t hidden, std::size_t blocks, Activation act) {
  std::vector<LayerSpec> specs;
  for (std::size_t b = 0; b < blocks; ++b) {
    specs.push_back({hidden, hidden, act, false, 1.0});
    specs.push_back({hidden, hidden, act, true, 0.1});
  }
  return specs;
}

template <typename T>
BackgroundField<T> make_background(const FieldConfig& c, std::mt19937_64& rng) {
  BackgroundField<T> b;
  b.stage1 = num::make_mlp<T>("bg.stage1",
                              num::chain_specs(c.pos_dim(), c.bg_hidden, c.bg_layers, 1 + c.bg_feature,
                                               c.hidden_activation, Activation::None),
                              rng);
  b.stage2 = num::make_mlp<T>(
      "bg.stage2",
      num::chain_specs(c.dir_dim() + c.bg_feature, c.bg_color_hidden, 1, 3, c.hidden_activation, Activation::None),
      rng);
  return b;
}

template <typename T>
ObjectDecoder<T> make_decoder(const FieldConfig& c, const std::string& key, std::mt19937_64& rng) {
  const std::string p = "obj." + key + ".";
  const std::size_t h = c.obj_hidden;
  const double in_s = static_cast<double>(c.pos_dim() + c.latent_shape);
  const double in_a = static_cast<double>(h + c.dir_dim() + c.pos_dim() + c.latent_shape + c.latent_appearance);
  ObjectDecoder<T> d;
  // Split first layers share one He bound computed over the full fan-in.
  const double gs = std::sqrt(static_cast<double>(c.pos_dim()) / in_s);
  const double gl = std::sqrt(static_cast<double>(c.latent_shape) / in_s);
  d.shape_x_w = weight<T>(p + "shape_x.weight", c.pos_dim(), h, gs, rng);
  d.shape_x_b = zeros<T>(p + "shape_x.bias", {h});
  d.shape_latent_w = weight<T>(p + "shape_latent.weight", c.latent_shape, h, gl, rng);
  d.shape_trunk = num::make_mlp<T>(p + "shape_trunk", block_specs(h, c.obj_blocks, c.hidden_activation), rng);
  d.sigma_head = num::make_linear<T>(p + "sigma_head", {h, 1, Activation::None, false, 0.5}, rng);

  const double ax = static_cast<double>(h + c.dir_dim() + c.pos_dim());
  const double al = static_cast<double>(c.latent_shape + c.latent_appearance);
  d.app_x_w = weight<T>(p + "app_x.weight", h + c.dir_dim() + c.pos_dim(), h, std::sqrt(ax / in_a), rng);
  d.app_x_b = zeros<T>(p + "app_x.bias", {h});
  d.app_latent_w = weight<T>(p + "app_latent.weight", c.latent_shape + c.latent_appearance, h,
                             std::sqrt(al / in_a), rng);
  auto specs = block_specs(h, c.obj_blocks, c.hidden_activation);
  specs.push_back({h, 3, Activation::None, false, 0.5});
  d.app_trunk = num::make_mlp<T>(p + "app_trunk", specs, rng);
  return d;
}

template <typename T>
ObjectEncoder<T> make_encoder(const FieldConfig& c, std::mt19937_64& rng) {
  ObjectEncoder<T> e;
  std::size_t cin = 3;
  for (std::size_t i = 0; i < c.enc_channels.size(); ++i) {
    const std::string n = "enc.conv" + std::to_string(i);
    e.conv_w.push_back(weight<T>(n + ".weight", 16 * cin, c.enc_channels[i], 1.0, rng));
    e.conv_b.push_back(zeros<T>(n + ".bias", {c.enc_channels[i]}));
    cin = c.enc_channels[i];
  }
  e.shape_head = num::make_linear<T>("enc.shape_head", {c.encoder_flat_dim(), c.latent_shape, Activation::None, false, 0.5}, rng);
  e.appearance_head =
      num::make_linear<T>("enc.appearance_head", {c.encoder_flat_dim(), c.latent_appearance, Activation::None, false, 0.5}, rng);
  return e;
}

template <typename T>
FarField<T> make_far(const FieldConfig& c) {
  return {zeros<T>("far.logits", {c.env_height * c.env_width, 3})};
}

template <typename U, typename T>
num::MlpParams<U> cast_mlp(const num::MlpParams<T>& m) {
  num::MlpParams<U> out;
  for (const auto& l : m.layers) {
    num::LinearLayer<U> c;
    c.weight = l.weight.template cast<U>();
    c.bias = l.bias.template cast<U>();
    c.activation = l.activation;
    c.residual = l.residual;
    out.layers.push_back(std::move(c));
  }
  return out;
}

template <typename U, typename T>
num::LinearLayer<U> cast_linear(const num::LinearLayer<T>& l) {
  num::LinearLayer<U> c;
  c.weight = l.weight.template cast<U>();
  c.bias = l.bias.template cast<U>();
  c.activation = l.activation;
  c.residual = l.residual;
  return c;
}

template <typename T>
Var<T> linear(Var<T> x, const Parameter<T>& w, const Parameter<T>& b) {
  auto& tape = *x.tape;
  return num::add(num::matmul(x, tape.parameter(w)), tape.parameter(b));
}

template <typename T>
Var<T> linear(Var<T> x, const num::LinearLayer<T>& l) {
  return num::activate(linear(x, l.weight, l.bias), l.activation);
}

}  // namespace

template <typename T>
std::vector<Parameter<T>*> GraphFields<T>::params() {
  std::vector<Parameter<T>*> out;
  visit_all(*this, [&out](Parameter<T>& p) { out.push_back(&p); });
  return out;
}

template <typename T>
std::vector<const Parameter<T>*> GraphFields<T>::params() const {
  std::vector<const Parameter<T>*> out;
  visit_all(const_cast<GraphFields<T>&>(*this), [&out](Parameter<T>& p) { out.push_back(&p); });
  return out;
}

template <typename T>
std::vector<Parameter<T>*> GraphFields<T>::object_params() {
  std::vector<Parameter<T>*> out;
  for (auto& [k, d] : decoders) visit(d, [&out](Parameter<T>& p) { out.push_back(&p); });
  visit(encoder, [&out](Parameter<T>& p) { out.push_back(&p); });
  return out;
}

template <typename T>
template <typename U>
GraphFields<U> GraphFields<T>::cast() const {
  GraphFields<U> g;
  g.background.stage1 = cast_mlp<U>(background.stage1);
  g.background.stage2 = cast_mlp<U>(background.stage2);
  for (const auto& [k, d] : decoders) {
    ObjectDecoder<U> c;
    c.shape_x_w = d.shape_x_w.template cast<U>();
    c.shape_x_b = d.shape_x_b.template cast<U>();
    c.shape_latent_w = d.shape_latent_w.template cast<U>();
    c.shape_trunk = cast_mlp<U>(d.shape_trunk);
    c.sigma_head = cast_linear<U>(d.sigma_head);
    c.app_x_w = d.app_x_w.template cast<U>();
    c.app_x_b = d.app_x_b.template cast<U>();
    c.app_latent_w = d.app_latent_w.template cast<U>();
    c.app_trunk = cast_mlp<U>(d.app_trunk);
    g.decoders.emplace(k, std::move(c));
  }
  for (std::size_t i = 0; i < encoder.conv_w.size(); ++i) {
    g.encoder.conv_w.push_back(encoder.conv_w[i].template cast<U>());
    g.encoder.conv_b.push_back(encoder.conv_b[i].template cast<U>());
  }
  g.encoder.shape_head = cast_linear<U>(encoder.shape_head);
  g.encoder.appearance_head = cast_linear<U>(encoder.appearance_head);
  g.far.logits = far.logits.template cast<U>();
  return g;
}

template <typename T>
GraphFields<T> make_graph_fields(const FieldConfig& cfg, const std::set<std::string>& decoder_keys,
                                 std::mt19937_64& rng) {
  cfg.validate();
  GraphFields<T> g;
  g.background = make_background<T>(cfg, rng);
  for (const auto& k : decoder_keys) g.decoders.emplace(k, make_decoder<T>(cfg, k, rng));
  g.encoder = make_encoder<T>(cfg, rng);
  g.far = make_far<T>(cfg);
  return g;
}

template <typename T>
GraphFields<T> spawn_graph_fields(const FieldConfig& cfg, const GraphFields<T>& previous, std::mt19937_64& rng) {
  GraphFields<T> g = previous;
  g.background = make_background<T>(cfg, rng);
  for (auto* p : g.params()) p->zero_grad();
  return g;
}

// ---------------------------------------------------------------------------
// Forward passes

template <typename T>
FieldOutput<T> background_forward(const FieldConfig& cfg, const BackgroundField<T>& f, Var<T> enc_x, Var<T> enc_d) {
  Var<T> s1 = num::forward(f.stage1, enc_x);
  Var<T> sigma = num::softplus(num::slice_cols(s1, 0, 1));
  Var<T> z = num::slice_cols(s1, 1, 1 + cfg.bg_feature);
  Var<T> rgb = num::sigmoid(num::forward(f.stage2, num::concat_cols<T>({enc_d, z})));
  return {sigma, rgb};
}

template <typename T>
FieldOutput<T> object_forward(const FieldConfig& cfg, const ObjectDecoder<T>& f, Var<T> enc_x, Var<T> enc_d,
                              Var<T> codes_s, Var<T> codes_a, const std::vector<std::int64_t>& instance) {
  auto& tape = *enc_x.tape;
  const Activation act = cfg.hidden_activation;
  Var<T> lat_s = num::gather_rows(num::matmul(codes_s, tape.parameter(f.shape_latent_w)), instance);
  Var<T> h0 = num::activate(num::add(linear(enc_x, f.shape_x_w, f.shape_x_b), lat_s), act);
  Var<T> h = num::forward(f.shape_trunk, h0);
  Var<T> sigma = num::softplus(linear(h, f.sigma_head));

  Var<T> codes = num::concat_cols<T>({codes_s, codes_a});
  Var<T> lat_a = num::gather_rows(num::matmul(codes, tape.parameter(f.app_latent_w)), instance);
  Var<T> a_in = num::concat_cols<T>({h, enc_d, enc_x});
  Var<T> a0 = num::activate(num::add(linear(a_in, f.app_x_w, f.app_x_b), lat_a), act);
  Var<T> rgb = num::sigmoid(num::forward(f.app_trunk, a0));
  return {sigma, rgb};
}

EnvLookup env_lookup(const FieldConfig& cfg, const std::vector<Vec3>& dirs) {
  const auto H = static_cast<std::int64_t>(cfg.env_height), W = static_cast<std::int64_t>(cfg.env_width);
  EnvLookup out;
  out.texel.reserve(dirs.size() * 4);
  out.weight.reserve(dirs.size() * 4);
  for (const Vec3& d0 : dirs) {
    const Vec3 d = d0.normalized();
    const double theta = std::acos(std::clamp(d.z(), -1.0, 1.0));
    const double phi = std::atan2(d.y(), d.x());
    const double u = theta / std::numbers::pi * static_cast<double>(H) - 0.5;
    const double v = (phi + std::numbers::pi) / (2.0 * std::numbers::pi) * static_cast<double>(W) - 0.5;
    std::int64_t i0 = static_cast<std::int64_t>(std::floor(u));
    double fu = u - static_cast<double>(i0);
    std::int64_t i1 = i0 + 1;
    if (i0 < 0) {
      i0 = i1 = 0;
      fu = 0.0;
    } else if (i1 > H - 1) {
      i0 = i1 = H - 1;
      fu = 0.0;
    }
    const std::int64_t jf = static_cast<std::int64_t>(std::floor(v));
    const double fv = v - static_cast<double>(jf);
    const std::int64_t j0 = ((jf % W) + W) % W, j1 = (j0 + 1) % W;
    out.texel.insert(out.texel.end(), {i0 * W + j0, i0 * W + j1, i1 * W + j0, i1 * W + j1});
    out.weight.insert(out.weight.end(), {(1 - fu) * (1 - fv), (1 - fu) * fv, fu * (1 - fv), fu * fv});
  }
  return out;
}

template <typename T>
Var<T> farfield_forward(const FieldConfig& cfg, const FarField<T>& f, const std::vector<Vec3>& dirs, Tape<T>& tape) {
  const EnvLookup lk = env_lookup(cfg, dirs);
  const std::size_t n = dirs.size();
  Var<T> texels = num::gather_rows(tape.parameter(f.logits), lk.texel);  // (4n, 3)
  Tensor<T> w(num::Shape{4 * n, 1});
  for (std::size_t i = 0; i < 4 * n; ++i) w[i] = static_cast<T>(lk.weight[i]);
  Var<T> weighted = num::reshape(num::mul(texels, tape.constant(std::move(w))), {n, 12});
  Tensor<T> sel(num::Shape{12, 3});
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t c = 0; c < 3; ++c) sel.at(3 * k + c, c) = T(1);
  return num::sigmoid(num::matmul(weighted, tape.constant(std::move(sel))));
}

template <typename T>
std::pair<Var<T>, Var<T>> encoder_forward(const FieldConfig& cfg, const ObjectEncoder<T>& f, Var<T> crops,
                                          const std::vector<std::vector<std::size_t>>& groups) {
  auto& tape = *crops.tape;
  const std::size_t n = crops.rows();
  const std::size_t px = cfg.crop * cfg.crop;
  if (crops.cols() != px * 3) {
    throw ShapeError("encoder crops have " + std::to_string(crops.cols()) + " values, expected " +
                     std::to_string(px * 3));
  }
  // Feature maps are stored one pixel per row: (n * H * W, C).
  Var<T> x = num::reshape(crops, {n * px, 3});
  std::size_t side = cfg.crop;
  for (std::size_t layer = 0; layer < f.conv_w.size(); ++layer) {
    const std::size_t out = side / 2;
    std::vector<std::int64_t> idx;
    idx.reserve(n * out * out * 16);
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t oy = 0; oy < out; ++oy)
        for (std::size_t ox = 0; ox < out; ++ox)
          for (int ky = 0; ky < 4; ++ky)
            for (int kx = 0; kx < 4; ++kx) {
              const auto iy = static_cast<std::int64_t>(2 * oy) - 1 + ky;
              const auto ix = static_cast<std::int64_t>(2 * ox) - 1 + kx;
              const auto s = static_cast<std::int64_t>(side);
              idx.push_back(iy < 0 || ix < 0 || iy >= s || ix >= s
                                ? -1
                                : static_cast<std::int64_t>(b * side * side) + iy * s + ix);
            }
    Var<T> cols = num::gather_rows(x, std::move(idx), 16);
    x = num::relu(num::add(num::matmul(cols, tape.parameter(f.conv_w[layer])), tape.parameter(f.conv_b[layer])));
    side = out;
  }
  Var<T> flat = num::reshape(x, {n, cfg.encoder_flat_dim()});
  Tensor<T> avg(num::Shape{groups.size(), n});
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty()) throw InputError("object instance has no crops to encode");
    for (std::size_t k : groups[g]) avg.at(g, k) += T(1) / static_cast<T>(groups[g].size());
  }
  Var<T> pooled = num::matmul(tape.constant(std::move(avg)), flat);
  return {linear(pooled, f.shape_head), linear(pooled, f.appearance_head)};
}

// ---------------------------------------------------------------------------
// Point evaluation

namespace {

void check_finite(const Tensor<double>& t, const char* stage) {
  for (double v : t.data())
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite activation in ") + stage);
}

template <typename T>
Tensor<T> encode_row(const Vec3& x, int L, bool include, const std::vector<double>& mask) {
  Tensor<T> out(num::Shape{1, encoded_dim(3, L, include)});
  encode3<T>(x.data(), L, include, mask, out.data().data());
  return out;
}

template <typename T>
PointSample to_point(Var<T> sigma, Var<T> rgb, const char* stage) {
  const auto s = sigma.value().template cast<double>();
  const auto c = rgb.value().template cast<double>();
  check_finite(s, stage);
  check_finite(c, stage);
  return {s[0], {c[0], c[1], c[2]}};
}

template <typename T>
Var<T> codes_row(Tape<T>& tape, const std::vector<double>& v, std::size_t dim) {
  Tensor<T> t(num::Shape{1, dim});
  for (std::size_t i = 0; i < std::min(dim, v.size()); ++i) t[i] = static_cast<T>(v[i]);
  return tape.constant(std::move(t));
}

}  // namespace

template <typename T>
PointSample background_eval(const Vec3& x, const Vec3& d, const GraphFields<T>& f, const FieldConfig& cfg,
                            const EncodingSchedule& sched, const Vec3& center) {
  if (std::abs(d.norm() - 1.0) > 1e-6) throw ContractError("background_eval needs a unit direction");
  Tape<T> tape(false);
  const Vec3 xn = (x - center) / cfg.scene_scale;
  Var<T> ex = tape.constant(encode_row<T>(xn, cfg.L_position, cfg.include_input, sched.position_mask()));
  Var<T> ed = tape.constant(encode_row<T>(d, cfg.L_direction, cfg.include_input, sched.direction_mask()));
  Var<T> s1 = num::forward(f.background.stage1, ex);
  check_finite(s1.value().template cast<double>(), "background stage 1");
  auto out = background_forward(cfg, f.background, ex, ed);
  return to_point(out.sigma, out.rgb, "background stage 2");
}

template <typename T>
PointSample object_eval(const Vec3& x_o, const Vec3& d_o, const LatentCodes& codes, const std::string& key,
                        const GraphFields<T>& f, const FieldConfig& cfg, const EncodingSchedule& sched) {
  if (x_o.cwiseAbs().maxCoeff() > 0.7) throw ContractError("object-space point lies outside [-0.7, 0.7]^3");
  auto it = f.decoders.find(key);
  if (it == f.decoders.end()) throw UnresolvedKeyError("no decoder for key '" + key + "'");
  Tape<T> tape(false);
  Var<T> ex = tape.constant(encode_row<T>(x_o, cfg.L_position, cfg.include_input, sched.position_mask()));
  Var<T> ed = tape.constant(encode_row<T>(d_o, cfg.L_direction, cfg.include_input, sched.direction_mask()));
  auto out = object_forward(cfg, it->second, ex, ed, codes_row(tape, codes.shape, cfg.latent_shape),
                            codes_row(tape, codes.appearance, cfg.latent_appearance), {0});
  return to_point(out.sigma, out.rgb, "object decoder");
}

template <typename T>
std::array<double, 3> farfield_eval(const Vec3& d, const GraphFields<T>& f, const FieldConfig& cfg) {
  Tape<T> tape(false);
  Var<T> c = farfield_forward(cfg, f.far, {d}, tape);
  return {static_cast<double>(c.value()[0]), static_cast<double>(c.value()[1]), static_cast<double>(c.value()[2])};
}

template <typename T>
LatentCodes encode_object(const std::vector<float>& crop, const GraphFields<T>& f, const FieldConfig& cfg) {
  if (crop.size() != cfg.crop * cfg.crop * 3) throw ShapeError("encoder crop has the wrong number of values");
  Tape<T> tape(false);
  Tensor<T> t(num::Shape{1, crop.size()});
  for (std::size_t i = 0; i < crop.size(); ++i) t[i] = static_cast<T>(crop[i]);
  auto [s, a] = encoder_forward(cfg, f.encoder, tape.constant(std::move(t)), {{0}});
  LatentCodes out;
  for (T v : s.value().data()) out.shape.push_back(static_cast<double>(v));
  for (T v : a.value().data()) out.appearance.push_back(static_cast<double>(v));
  return out;
}

#define PROSG_INSTANTIATE_FIELDS(T)                                                                                 \
  template struct GraphFields<T>;                                                                                  \
  template GraphFields<T> make_graph_fields(const FieldConfig&, const std::set<std::string>&, std::mt19937_64&);   \
  template GraphFields<T> spawn_graph_fields(const FieldConfig&, const GraphFields<T>&, std::mt19937_64&);         \
  template FieldOutput<T> background_forward(const FieldConfig&, const BackgroundField<T>&, Var<T>, Var<T>);      \
  template FieldOutput<T> object_forward(const FieldConfig&, const ObjectDecoder<T>&, Var<T>, Var<T>, Var<T>,      \
                                         Var<T>, const std::vector<std::int64_t>&);                               \
  template Var<T> farfield_forward(const FieldConfig&, const FarField<T>&, const std::vector<Vec3>&, Tape<T>&);    \
  template std::pair<Var<T>, Var<T>> encoder_forward(const FieldConfig&, const ObjectEncoder<T>&, Var<T>,          \
                                                     const std::vector<std::vector<std::size_t>>&);               \
  template PointSample background_eval(const Vec3&, const Vec3&, const GraphFields<T>&, const FieldConfig&,        \
                                       const EncodingSchedule&, const Vec3&);                                      \
  template PointSample object_eval(const Vec3&, const Vec3&, const LatentCodes&, const std::string&,               \
                                   const GraphFields<T>&, const FieldConfig&, const EncodingSchedule&);            \
  template std::array<double, 3> farfield_eval(const Vec3&, const GraphFields<T>&, const FieldConfig&);           \
  template LatentCodes encode_object(const std::vector<float>&, const GraphFields<T>&, const FieldConfig&);

PROSG_INSTANTIATE_FIELDS(float)
PROSG_INSTANTIATE_FIELDS(double)

template GraphFields<double> GraphFields<float>::cast<double>() const;
template GraphFields<float> GraphFields<double>::cast<float>() const;
template GraphFields<float> GraphFields<float>::cast<float>() const;
template GraphFields<double> GraphFields<double>::cast<double>() const;

}  // namespace prosg::fields
