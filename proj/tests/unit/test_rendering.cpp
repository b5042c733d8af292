// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "micro_scene.hpp"
#include "oracles.hpp"
#include "prosg/error.hpp"
#include "prosg/numerics/gradcheck.hpp"
#include "prosg/numerics/ops.hpp"
#include "prosg/rendering/model.hpp"

#include <doctest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>

using namespace prosg;
using namespace prosg::rendering;

namespace {

CompositeInput random_input(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::exponential_distribution<double> e(0.7);
  CompositeInput in;
  double t = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = 0.05 + u(rng);
    in.t.push_back(t);
    in.delta.push_back(d);
    in.sigma.push_back(u(rng) < 0.3 ? 0.0 : e(rng));
    in.rgb.push_back({u(rng), u(rng), u(rng)});
    in.node.push_back(u(rng) < 0.5 ? kBackgroundNode : 0);
    t += d;
  }
  in.far = {u(rng), u(rng), u(rng)};
  return in;
}

Camera micro_camera() {
  Camera cam;
  cam.width = 8;
  cam.height = 8;
  cam.K << 10.0, 0.0, 4.0, 0.0, 10.0, 4.0, 0.0, 0.0, 1.0;
  return cam;
}

}  // namespace

TEST_SUITE("rendering") {
  TEST_CASE("empty medium shows the far field") {
    CompositeInput in;
    in.t = {1, 2, 3};
    in.delta = {1, 1, 1};
    in.sigma = {0, 0, 0};
    in.rgb = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    in.far = {0.2, 0.3, 0.4};
    const auto out = composite(in);
    CHECK(out.color == Rgb{0.2, 0.3, 0.4});
    CHECK(out.depth == 0.0);
    CHECK(out.T_end == 1.0);
  }

  TEST_CASE("half transparent then opaque") {
    CompositeInput in;
    in.t = {1, 2};
    in.delta = {1, 1};
    in.sigma = {std::log(2.0), std::numeric_limits<double>::infinity()};
    in.rgb = {{1, 0, 0}, {0, 1, 0}};
    const auto out = composite(in);
    CHECK(out.color[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(out.color[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(out.color[2] == 0.0);
    CHECK(out.T_end == 0.0);
  }

  TEST_CASE("opaque first sample wins exactly") {
    std::mt19937_64 rng(1);
    auto in = random_input(rng, 6);
    in.sigma[0] = std::numeric_limits<double>::infinity();
    const auto out = composite(in);
    CHECK(out.color == in.rgb[0]);
  }

  TEST_CASE("weights and transmittance sum to one") {
    std::mt19937_64 rng(2);
    for (int k = 0; k < 2000; ++k) {
      const auto in = random_input(rng, 1 + k % 40);
      const auto out = composite(in);
      double s = out.T_end;
      for (double w : out.weights) s += w;
      CHECK(std::abs(s - 1.0) < 1e-6);
      double by_node = 0.0;
      for (const auto& [id, w] : out.node_weight) by_node += w;
      CHECK(std::abs(by_node - 1.0) < 1e-6);
    }
  }

  TEST_CASE("matches the naive quadrature") {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 200; ++k) {
      const auto in = random_input(rng, 1 + k % 30);
      const auto a = composite(in), b = testing::naive_composite(in);
      for (int c = 0; c < 3; ++c) CHECK(std::abs(a.color[c] - b.color[c]) < 1e-12);
      CHECK(std::abs(a.depth - b.depth) < 1e-12);
      CHECK(std::abs(a.T_end - b.T_end) < 1e-12);
    }
  }

  TEST_CASE("homogeneous medium follows Beer-Lambert") {
    const double sigma = 0.8, s = 3.0;
    CompositeInput in;
    for (int i = 0; i < 64; ++i) {
      in.t.push_back((i + 0.5) * s / 64);
      in.delta.push_back(s / 64);
      in.sigma.push_back(sigma);
      in.rgb.push_back({1, 1, 1});
    }
    const auto out = composite(in);
    CHECK(std::abs(out.T_end - std::exp(-sigma * s)) / std::exp(-sigma * s) < 0.01);
  }

  TEST_CASE("zero-density samples change nothing") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
      auto in = random_input(rng, 10);
      const auto before = composite(in);
      const std::size_t at = static_cast<std::size_t>(u(rng) * 10);
      in.t.insert(in.t.begin() + at, in.t[at]);
      in.delta.insert(in.delta.begin() + at, 0.3);
      in.sigma.insert(in.sigma.begin() + at, 0.0);
      in.rgb.insert(in.rgb.begin() + at, {u(rng), u(rng), u(rng)});
      in.node.insert(in.node.begin() + at, 0);
      const auto after = composite(in);
      for (int c = 0; c < 3; ++c) CHECK(std::abs(after.color[c] - before.color[c]) < 1e-10);
      CHECK(std::abs(after.depth - before.depth) < 1e-10);
    }
  }

  TEST_CASE("tags do not affect compositing") {
    std::mt19937_64 rng(5);
    auto in = random_input(rng, 12);
    const auto a = composite(in);
    for (auto& n : in.node) n = n == 0 ? kBackgroundNode : 3;
    const auto b = composite(in);
    in.node.clear();
    const auto c = composite(in);
    CHECK(a.color == b.color);
    CHECK(a.color == c.color);
    CHECK(a.depth == c.depth);
  }

  TEST_CASE("interval depth mode") {
    CompositeInput in;
    in.t = {5.0};
    in.delta = {2.0};
    in.sigma = {std::numeric_limits<double>::infinity()};
    in.rgb = {{0, 0, 0}};
    CHECK(composite(in, DepthMode::Distance).depth == 5.0);
    CHECK(composite(in, DepthMode::Interval).depth == 2.0);
  }

  TEST_CASE("invalid composite inputs") {
    CompositeInput in;
    in.t = {1};
    in.delta = {1};
    in.sigma = {-1};
    in.rgb = {{0, 0, 0}};
    CHECK_THROWS_AS(composite(in), ContractError);
    in.sigma = {1, 2};
    CHECK_THROWS_AS(composite(in), ShapeError);
  }

  TEST_CASE("colour loss gradient w.r.t. density and colour") {
    std::mt19937_64 rng(6);
    auto in = random_input(rng, 6);
    num::Parameter<double> sigma("sigma", num::Tensor<double>(num::Shape{1, 6}, in.sigma));
    num::Parameter<double> rgb("rgb", num::Tensor<double>(num::Shape{6, 3}));
    for (std::size_t i = 0; i < 6; ++i)
      for (int c = 0; c < 3; ++c) rgb.value.at(i, c) = in.rgb[i][c];
    for (auto& v : sigma.value.data()) v += 0.1;
    // Differentiable re-composition from the tape ops, checked against differences.
    auto loss = [&](num::Tape<double>& t) {
      auto s = t.parameter(sigma);
      num::Tensor<double> dt(num::Shape{1, 6}, in.delta);
      auto sd = num::mul(s, t.constant(dt));
      num::Tensor<double> tri(num::Shape{6, 6});
      for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = i + 1; j < 6; ++j) tri.at(i, j) = 1.0;
      auto T = num::exp(num::neg(num::matmul(sd, t.constant(tri))));
      auto alpha = num::add_scalar(num::neg(num::exp(num::neg(sd))), 1.0);
      auto w = num::mul(T, alpha);
      auto c = num::matmul(w, t.parameter(rgb));
      num::Tensor<double> target(num::Shape{1, 3}, {0.2, 0.5, 0.9});
      return num::mean(num::square(num::sub(c, t.constant(target))));
    };
    const auto rep = num::gradient_check(loss, {&sigma, &rgb}, 1e-6);
    CHECK(rep.max_rel_error < 1e-4);
  }

  TEST_CASE("batched compositing agrees with per-ray compositing") {
    auto s = testing::make_micro_scene();
    const auto batch = prepare_batch(s.rays, s.graph, s.render);
    num::Tape<double> tape(false);
    const auto codes = cached_codes(tape, batch, s.graph.graph, s.field);
    const auto pooled = evaluate_fields(tape, batch, s.fields, s.field, s.sched, s.graph.center, codes);
    const auto br = composite_batch(batch, pooled, s.render.depth_mode);
    const auto per_ray = render_graph_rays(s.rays, s.graph, s.fields, s.field, s.render, s.sched);
    for (std::size_t r = 0; r < s.rays.size(); ++r) {
      for (int c = 0; c < 3; ++c) CHECK(std::abs(br.color.value().at(r, c) - per_ray[r].color[c]) < 1e-12);
      CHECK(std::abs(br.depth.value()[r] - per_ray[r].depth) < 1e-12);
      CHECK(std::abs(br.T_end.value()[r] - per_ray[r].T_end) < 1e-12);
    }
    CHECK(batch.instances == std::vector<int>{0});
    CHECK(per_ray[0].node_weight.count(0) == 1);
    CHECK(per_ray[1].node_weight.count(0) == 0);
  }

  TEST_CASE("removing a node equals masking it") {
    const auto s = testing::make_micro_scene();
    auto model = testing::micro_model(s);
    RenderOptions masked;
    masked.mask.exclude = {0};
    const auto a = render_image(model, Pose{}, micro_camera(), 0, masked);
    auto removed = model;
    remove_node(removed.state.graphs[0].graph, 0);
    const auto b = render_image(removed, Pose{}, micro_camera(), 0);
    CHECK(a.color == b.color);
    CHECK(a.depth == b.depth);
    const auto full = render_image(model, Pose{}, micro_camera(), 0);
    CHECK(full.color != a.color);
  }

  TEST_CASE("layers reconstruct the full render") {
    const auto s = testing::make_micro_scene();
    const auto model = testing::micro_model(s);
    RenderOptions opt;
    opt.layers = true;
    const auto img = render_image(model, Pose{}, micro_camera(), 0, opt);
    REQUIRE(img.layers.count(kBackgroundNode) == 1);
    REQUIRE(img.layers.count(0) == 1);
    CHECK(img.layers.count(kFarFieldNode) == 0);
    for (int p = 0; p < 64; ++p) {
      double alpha = 0.0;
      for (int c = 0; c < 3; ++c) {
        double sum = 0.0;
        for (const auto& [id, layer] : img.layers) sum += layer[4 * p + c];
        CHECK(std::abs(sum - img.color[3 * p + c]) < 1e-5);
      }
      for (const auto& [id, layer] : img.layers) alpha += layer[4 * p + 3];
      CHECK(std::abs(alpha - 1.0) < 1e-5);
    }
    auto empty = model;
    remove_node(empty.state.graphs[0].graph, 0);
    const auto bg = render_image(empty, Pose{}, micro_camera(), 0, opt);
    CHECK(bg.layers.size() == 1);
    for (int p = 0; p < 64; ++p)
      for (int c = 0; c < 3; ++c) CHECK(std::abs(bg.layers.at(kBackgroundNode)[4 * p + c] - bg.color[3 * p + c]) < 1e-6);
  }

  TEST_CASE("renders are deterministic and thread-count independent") {
    const auto s = testing::make_micro_scene();
    const auto model = testing::micro_model(s);
    RenderOptions one, four;
    four.threads = 4;
    const auto a = render_image(model, Pose{}, micro_camera(), 0, one);
    const auto b = render_image(model, Pose{}, micro_camera(), 0, one);
    const auto c = render_image(model, Pose{}, micro_camera(), 0, four);
    CHECK(a.color == b.color);
    CHECK(a.color == c.color);
  }

  TEST_CASE("fusion of identical graphs equals either graph") {
    const auto s = testing::make_micro_scene();
    auto one = testing::micro_model(s);
    auto two = one;
    two.state.graphs.push_back(two.state.graphs[0]);
    two.state.graphs[0].frozen = true;
    two.state.graphs[1].center = Vec3(3, 0, 0);
    two.fields.push_back(two.fields[0]);
    const auto a = render_image(one, Pose{}, micro_camera(), 0);
    const auto b = render_image(two, Pose{}, micro_camera(), 0);
    for (std::size_t i = 0; i < a.color.size(); ++i) CHECK(std::abs(a.color[i] - b.color[i]) < 1e-6);
  }

  TEST_CASE("camera at a graph centre takes that graph") {
    const auto s = testing::make_micro_scene();
    auto two = testing::micro_model(s);
    two.state.graphs.push_back(two.state.graphs[0]);
    two.state.graphs[0].frozen = true;
    two.state.graphs[1].center = Vec3(3, 0, 0);
    std::mt19937_64 rng(99);
    two.fields.push_back(fields::make_graph_fields<float>(s.field, {"car"}, rng));
    auto only0 = two;
    only0.state.graphs.pop_back();
    only0.fields.pop_back();
    const auto a = render_image(two, Pose{}, micro_camera(), 0);
    const auto b = render_image(only0, Pose{}, micro_camera(), 0);
    CHECK(a.color == b.color);
  }

  TEST_CASE("model save and load round trip") {
    const auto s = testing::make_micro_scene();
    const auto model = testing::micro_model(s);
    const auto path = std::filesystem::temp_directory_path() / "prosg_unit_model.prosg";
    save_model(model, path, {{"note", "x"}});
    const auto back = load_model(path);
    CHECK(render_image(back, Pose{}, micro_camera(), 0).color == render_image(model, Pose{}, micro_camera(), 0).color);
    std::filesystem::remove(path);
  }

  TEST_CASE("uncovered cameras are reported") {
    const auto s = testing::make_micro_scene();
    const auto model = testing::micro_model(s);
    Pose far;
    far.t = Vec3(500, 0, 0);
    CHECK_THROWS_AS(render_image(model, far, micro_camera(), 9), CoverageError);
  }
}
