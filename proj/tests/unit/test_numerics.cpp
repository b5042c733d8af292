// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "prosg/error.hpp"
#include "prosg/numerics/adam.hpp"
#include "prosg/numerics/checkpoint.hpp"
#include "prosg/numerics/gradcheck.hpp"
#include "prosg/numerics/mlp.hpp"
#include "prosg/numerics/ops.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

using namespace prosg;
using namespace prosg::num;

namespace {

Tensor<double> random_tensor(Shape shape, std::mt19937_64& rng, double scale = 1.0) {
  Tensor<double> t(std::move(shape));
  std::normal_distribution<double> n(0.0, scale);
  for (auto& v : t.data()) v = n(rng);
  return t;
}

}  // namespace

TEST_SUITE("numerics") {
  TEST_CASE("tensor shape contract") {
    CHECK_THROWS_AS(Tensor<double>(Shape{2, 3}, std::vector<double>(5)), ShapeError);
    Tensor<double> t(Shape{2, 3}, 1.5);
    CHECK(t.size() == 6);
    CHECK(t.rows() == 2);
    CHECK(t.cols() == 3);
    CHECK(element_count({4, 5, 2}) == 40);
  }

  TEST_CASE("identity linear layer passes input through") {
    std::mt19937_64 rng(1);
    auto layer = make_linear<double>("id", {3, 3, Activation::None, false, 0.0}, rng);
    for (std::size_t i = 0; i < 3; ++i) layer.weight.value.at(i, i) = 1.0;
    MlpParams<double> mlp;
    mlp.layers.push_back(layer);
    Tape<double> tape;
    const auto x = random_tensor({5, 3}, rng);
    const auto y = forward(mlp, tape.constant(x));
    CHECK(y.value() == x);
  }

  TEST_CASE("zero-weight layer broadcasts its bias") {
    std::mt19937_64 rng(2);
    auto layer = make_linear<double>("b", {4, 2, Activation::None, false, 0.0}, rng);
    layer.bias.value[0] = 0.25;
    layer.bias.value[1] = -3.0;
    MlpParams<double> mlp;
    mlp.layers.push_back(layer);
    Tape<double> tape;
    const auto y = forward(mlp, tape.constant(random_tensor({6, 4}, rng)));
    for (std::size_t r = 0; r < 6; ++r) {
      CHECK(y.value().at(r, 0) == 0.25);
      CHECK(y.value().at(r, 1) == -3.0);
    }
  }

  TEST_CASE("two-layer net output shape") {
    std::mt19937_64 rng(3);
    auto mlp = make_mlp<double>("net", chain_specs(3, 16, 1, 4, Activation::Relu, Activation::None), rng);
    Tape<double> tape;
    const auto y = forward(mlp, tape.constant(random_tensor({8, 3}, rng)));
    CHECK(y.shape() == Shape{8, 4});
    CHECK_THROWS_AS(forward(mlp, tape.constant(random_tensor({8, 5}, rng))), ShapeError);
  }

  TEST_CASE("mismatched layer chain is rejected") {
    std::mt19937_64 rng(4);
    MlpParams<double> mlp;
    mlp.layers.push_back(make_linear<double>("a", {3, 4, Activation::Relu, false, 1.0}, rng));
    mlp.layers.push_back(make_linear<double>("b", {5, 2, Activation::None, false, 1.0}, rng));
    CHECK_THROWS_AS(mlp.validate(), ShapeError);
  }

  TEST_CASE("sum(W x) gradient is x broadcast") {
    std::mt19937_64 rng(5);
    Parameter<double> W("W", random_tensor({3, 2}, rng));
    const auto x = random_tensor({1, 3}, rng);
    Tape<double> tape;
    tape.backward(sum(matmul(tape.constant(x), tape.parameter(W))));
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 2; ++j) CHECK(W.grad[i * 2 + j] == doctest::Approx(x[i]).epsilon(1e-14));
    }
  }

  TEST_CASE("||W x||^2 gradient is 2 x y^T") {
    std::mt19937_64 rng(6);
    Parameter<double> W("W", random_tensor({3, 2}, rng));
    const auto x = random_tensor({1, 3}, rng);
    Tape<double> tape;
    const auto y = matmul(tape.constant(x), tape.parameter(W));
    tape.backward(sum(square(y)));
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        CHECK(W.grad[i * 2 + j] == doctest::Approx(2.0 * x[i] * y.value()[j]).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("gradient check of w^2 at 3") {
    Parameter<double> w("w", Tensor<double>::scalar(3.0));
    const auto rep = gradient_check([&](Tape<double>& t) { return square(t.parameter(w)); }, {&w}, 1e-5);
    CHECK(rep.max_rel_error < 1e-6);
    CHECK(rep.analytic == doctest::Approx(6.0));
  }

  TEST_CASE("gradient check of a constant loss is zero") {
    Parameter<double> w("w", Tensor<double>(Shape{3}, 2.0));
    const double err = finite_difference_check(
        [&](Tape<double>& t) { return sum(t.constant(Tensor<double>(Shape{2}, 1.0))); }, {&w}, 1e-5);
    CHECK(err == 0.0);
    CHECK_THROWS_AS(finite_difference_check([&](Tape<double>& t) { return square(t.parameter(w)); }, {&w}, 0.0),
                    ContractError);
  }

  TEST_CASE("random composed graphs match finite differences") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
      std::mt19937_64 rng(seed);
      std::uniform_int_distribution<std::size_t> dim(1, 5);
      const std::size_t n = dim(rng), a = dim(rng), h = dim(rng), o = dim(rng);
      auto mlp = make_mlp<double>(
          "m", {{a, h, Activation::Softplus, false, 1.0}, {h, h, Activation::Sigmoid, false, 1.0},
                {h, o, Activation::None, false, 1.0}},
          rng);
      Parameter<double> extra("extra", random_tensor({n, o}, rng));
      const auto x = random_tensor({n, a}, rng);
      std::vector<Parameter<double>*> params{&extra};
      mlp.for_each_param([&](Parameter<double>& p) { params.push_back(&p); });
      auto loss = [&](Tape<double>& t) {
        auto y = forward(mlp, t.constant(x));
        auto e = t.parameter(extra);
        auto z = add(mul(sin(y), e), cos(scale(y, 0.5)));
        z = concat_cols<double>({z, exp(scale(e, 0.3)), log(add_scalar(square(e), 1.0))});
        auto rows = gather_rows(z, std::vector<std::int64_t>(n, 0));
        return add(mean(square(slice_cols(z, 0, o))), sum(sum_rows(rows)));
      };
      const auto rep = gradient_check(loss, params, 1e-4);
      INFO("seed " << seed << " worst " << rep.worst_param << "[" << rep.worst_index << "]");
      CHECK(rep.max_rel_error < 1e-4);
    }
  }

  TEST_CASE("backward is linear in the loss") {
    std::mt19937_64 rng(9);
    Parameter<double> w("w", random_tensor({4, 3}, rng));
    auto f = [&](Tape<double>& t) { return sum(sigmoid(t.parameter(w))); };
    auto g = [&](Tape<double>& t) { return mean(square(t.parameter(w))); };
    auto grad_of = [&](auto builder) {
      w.zero_grad();
      Tape<double> t;
      t.backward(builder(t));
      return w.grad;
    };
    const auto gf = grad_of(f), gg = grad_of(g);
    const auto gc = grad_of([&](Tape<double>& t) { return add(scale(f(t), 2.5), scale(g(t), -0.7)); });
    for (std::size_t i = 0; i < gc.size(); ++i) CHECK(std::abs(gc[i] - (2.5 * gf[i] - 0.7 * gg[i])) < 1e-10);
  }

  TEST_CASE("forward is deterministic for a fixed seed") {
    auto run = [] {
      std::mt19937_64 rng(42);
      auto mlp = make_mlp<float>("n", chain_specs(3, 8, 2, 2, Activation::Relu, Activation::Sigmoid), rng);
      Tensor<float> x(Shape{4, 3}, 0.3f);
      Tape<float> tape(false);
      return forward(mlp, tape.constant(x)).value();
    };
    CHECK(run() == run());
  }

  TEST_CASE("adam with zero gradient leaves parameters unchanged") {
    Parameter<double> w("w", Tensor<double>(Shape{3}, 1.0));
    OptimState<double> st;
    st.moments["w"] = {{0.2, 0.2, 0.2}, {0.1, 0.1, 0.1}};
    optimizer_step(st, {&w});
    for (double v : w.value.data()) CHECK(v == doctest::Approx(1.0 - 5e-4 * (0.18 / (1 - 0.9)) /
                                                                     (std::sqrt(0.0999 / (1 - 0.999)) + 1e-8)));
    OptimState<double> fresh;
    Parameter<double> u("u", Tensor<double>(Shape{2}, 0.5));
    optimizer_step(fresh, {&u});
    CHECK(u.value[0] == 0.5);
    CHECK(fresh.moments["u"].first[0] == 0.0);
  }

  TEST_CASE("adam first step moves by the learning rate against the gradient sign") {
    Parameter<double> w("w", Tensor<double>(Shape{2}, 0.0));
    w.grad = {0.3, -2.0};
    OptimState<double> st;
    st.learning_rate = 1e-2;
    optimizer_step(st, {&w});
    CHECK(w.value[0] == doctest::Approx(-1e-2 * 0.3 / (0.3 + 1e-8)).epsilon(1e-12));
    CHECK(w.value[1] == doctest::Approx(1e-2 * 2.0 / (2.0 + 1e-8)).epsilon(1e-12));
    CHECK(st.moments["w"].first[0] == doctest::Approx(0.03));
    CHECK(st.moments["w"].second[1] == doctest::Approx(0.004));
    CHECK(st.step == 1);
  }

  TEST_CASE("adam is deterministic and rejects non-finite gradients atomically") {
    auto run = [] {
      Parameter<double> w("w", Tensor<double>(Shape{3}, 1.0));
      OptimState<double> st;
      for (int k = 0; k < 2; ++k) {
        w.grad = {0.1, -0.4, 0.7};
        optimizer_step(st, {&w});
      }
      return w.value;
    };
    CHECK(run() == run());
    Parameter<double> a("a", Tensor<double>(Shape{1}, 1.0)), b("b", Tensor<double>(Shape{1}, 1.0));
    a.grad = {1.0};
    b.grad = {std::nan("")};
    OptimState<double> st;
    CHECK_THROWS_AS(optimizer_step(st, {&a, &b}), NumericError);
    CHECK(a.value[0] == 1.0);
    CHECK(st.step == 0);
    CHECK(st.moments.empty());
  }

  TEST_CASE("checkpoint round trip and checksum") {
    std::mt19937_64 rng(11);
    Parameter<float> p("p", random_tensor({3, 4}, rng).cast<float>());
    Parameter<float> q("q", random_tensor({5}, rng).cast<float>());
    const auto path = std::filesystem::temp_directory_path() / "prosg_unit_ckpt.prosg";
    write_checkpoint<float>(path, "unit", std::vector<const Parameter<float>*>{&p, &q}, {{"k", 1}});
    const auto before = param_checksum<float>({&p, &q});
    const auto ck = read_checkpoint(path);
    CHECK(ck.module == "unit");
    CHECK(ck.meta.at("k") == 1);
    Parameter<float> p2("p", Tensor<float>(Shape{3, 4})), q2("q", Tensor<float>(Shape{5}));
    restore_params<float>(ck, {&p2, &q2});
    CHECK(p2.value == p.value);
    CHECK(param_checksum<float>({&p2, &q2}) == before);
    q2.value[0] += 1.0f;
    CHECK(param_checksum<float>({&p2, &q2}) != before);
    Parameter<float> bad("p", Tensor<float>(Shape{4, 3}));
    CHECK_THROWS_AS(restore_params<float>(ck, {&bad}), ShapeError);
    Parameter<float> missing("r", Tensor<float>(Shape{1}));
    CHECK_THROWS_AS(restore_params<float>(ck, {&missing}), LookupError);
    CHECK_THROWS_AS(read_checkpoint(path.string() + ".absent"), LoadError);
    std::filesystem::remove(path);
  }
}
