// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "prosg/dataio/synthetic.hpp"
#include "prosg/fields/encoding.hpp"
#include "prosg/rendering/composite.hpp"
#include "prosg/rendering/model.hpp"
#include "prosg/sampling/sampling.hpp"
#include "prosg/training/trainer.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace prosg;

namespace {

void BM_RayBox(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<std::pair<Vec3, Vec3>> rays(1024);
  for (auto& [o, d] : rays) {
    o = Vec3(u(rng), u(rng), u(rng));
    d = Vec3(u(rng), u(rng), u(rng)).normalized();
  }
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [o, d] = rays[i++ & 1023];
    benchmark::DoNotOptimize(sampling::ray_box_intersect(o, d));
  }
}
BENCHMARK(BM_RayBox);

void BM_Composite(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  rendering::CompositeInput in;
  for (std::size_t i = 0; i < n; ++i) {
    in.t.push_back(1.0 + 0.1 * i);
    in.delta.push_back(0.1);
    in.sigma.push_back(0.05 * (i % 7));
    in.rgb.push_back({0.2, 0.4, 0.6});
  }
  for (auto _ : state) benchmark::DoNotOptimize(rendering::composite(in));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Composite)->Arg(31)->Arg(64)->Arg(128);

void BM_PositionalEncode(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const std::vector<double> mask = fields::frequency_mask(0.5, 1.0, L);
  std::vector<double> out(fields::encoded_dim(3, L, true));
  const double x[3] = {0.1, -0.4, 0.7};
  for (auto _ : state) {
    fields::encode3(x, L, true, mask, out.data());
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_PositionalEncode)->Arg(4)->Arg(10);

struct SceneFixture {
  dataio::SceneDataset data;
  RunConfig cfg;
  SceneFixture() {
    dataio::SyntheticConfig sc;
    sc.frames = 4;
    data = dataio::generate_synthetic(sc);
    cfg.train.eval_every = 0;
    cfg.train.checkpoint_every = 0;
  }
};

void BM_TrainStep(benchmark::State& state) {
  SceneFixture f;
  f.cfg.train.batch = static_cast<int>(state.range(0));
  training::Trainer trainer(f.data, f.cfg);
  for (auto _ : state) benchmark::DoNotOptimize(trainer.step());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainStep)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_RenderImage(benchmark::State& state) {
  SceneFixture f;
  training::Trainer trainer(f.data, f.cfg);
  trainer.cache_codes(0);
  const auto& fd = f.data.frame(0);
  RenderOptions opts;
  opts.threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(render_image(trainer.model(), fd.info.pose, fd.info.camera, 0, opts));
  }
  state.SetItemsProcessed(state.iterations() * fd.info.camera.width * fd.info.camera.height);
}
BENCHMARK(BM_RenderImage)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
