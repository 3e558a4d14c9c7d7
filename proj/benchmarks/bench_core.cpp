// Micro-benchmarks for the hot paths: physics stepping, policy network
// forward/backward, depth rendering, and advantage estimation.

#include <benchmark/benchmark.h>

#include <vector>

#include "keyloco/depth/render.hpp"
#include "keyloco/nn/conv.hpp"
#include "keyloco/nn/mlp.hpp"
#include "keyloco/rl/gae.hpp"
#include "keyloco/rng.hpp"
#include "keyloco/sim/world.hpp"
#include "keyloco/tasks/scenes.hpp"

using namespace keyloco;

static void BM_SimStep(benchmark::State& state) {
  sim::SimConfig cfg;
  auto s = sim::standing_state(cfg);
  std::vector<sim::SceneObject> objs;
  sim::LowLevelAction act{};
  for (auto _ : state) {
    auto report = sim::step(s, objs, act, cfg);
    benchmark::DoNotOptimize(report);
  }
}
BENCHMARK(BM_SimStep);

static void BM_SimStepWithScene(benchmark::State& state) {
  sim::SimConfig cfg;
  Rng rng(123);
  auto scene = tasks::make_scene(TaskId::kPushBox);
  std::vector<sim::SceneObject> objs;
  auto s = sim::reset(scene, rng, cfg, objs);
  sim::LowLevelAction act{};
  for (auto _ : state) {
    auto report = sim::step(s, objs, act, cfg);
    benchmark::DoNotOptimize(report);
  }
}
BENCHMARK(BM_SimStepWithScene);

static void BM_PdAction(benchmark::State& state) {
  sim::SimConfig cfg;
  auto s = sim::standing_state(cfg);
  std::vector<double> a(18, 0.3);  // 15 effector offsets + 2 root vel + yaw rate
  for (auto _ : state) {
    auto act = sim::pd_action(s, cfg, a.data());
    benchmark::DoNotOptimize(act);
  }
}
BENCHMARK(BM_PdAction);

static void BM_MlpForward(benchmark::State& state) {
  int hidden = static_cast<int>(state.range(0));
  nn::Mlp<float> net(std::vector<int>{71, hidden, hidden, 18});
  Rng rng(7);
  net.init(rng, 0.01f);
  std::vector<float> x(71, 0.1f);
  nn::Mlp<float>::Cache cache;
  for (auto _ : state) {
    const auto& y = net.forward(x.data(), cache);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_MlpForward)->Arg(64)->Arg(128)->Arg(256);

static void BM_MlpBackward(benchmark::State& state) {
  int hidden = static_cast<int>(state.range(0));
  nn::Mlp<float> net(std::vector<int>{71, hidden, hidden, 18});
  Rng rng(7);
  net.init(rng, 0.01f);
  std::vector<float> x(71, 0.1f), dy(18, 1.0f);
  nn::Mlp<float>::Cache cache;
  auto grads = net.make_grads();
  net.forward(x.data(), cache);
  for (auto _ : state) {
    net.backward(cache, dy, grads);
    benchmark::DoNotOptimize(grads);
  }
}
BENCHMARK(BM_MlpBackward)->Arg(64)->Arg(128)->Arg(256);

static void BM_DepthEncoderForward(benchmark::State& state) {
  nn::DepthEncoder<float> enc;
  Rng rng(11);
  enc.init(rng);
  std::vector<float> img(depth::DepthImage::kPixels, 0.5f);
  nn::DepthEncoder<float>::Cache cache;
  for (auto _ : state) {
    const auto& f = enc.forward(img.data(), cache);
    benchmark::DoNotOptimize(f.data());
  }
}
BENCHMARK(BM_DepthEncoderForward);

static void BM_RenderDepth(benchmark::State& state) {
  sim::SimConfig cfg;
  Rng rng(123);
  auto scene = tasks::make_scene(TaskId::kPushBox);
  std::vector<sim::SceneObject> objs;
  auto s = sim::reset(scene, rng, cfg, objs);
  depth::CameraSpec cam;
  for (auto _ : state) {
    auto img = depth::render_depth(s, objs, cam);
    benchmark::DoNotOptimize(img.px.data());
  }
}
BENCHMARK(BM_RenderDepth);

static void BM_AugmentDepth(benchmark::State& state) {
  depth::DepthImage img;
  img.px.fill(0.5f);
  depth::MaskAugmentConfig cfg;
  Rng rng(42);
  for (auto _ : state) {
    auto out = depth::augment_depth(img, cfg, rng);
    benchmark::DoNotOptimize(out.px.data());
  }
}
BENCHMARK(BM_AugmentDepth);

static void BM_Gae(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  Rng rng(5);
  std::vector<double> rewards(n), values(n + 1);
  std::vector<unsigned char> dones(n, 0);
  for (int i = 0; i < n; ++i) rewards[i] = rng.uniform(-1.0, 1.0);
  for (int i = 0; i <= n; ++i) values[i] = rng.uniform(-1.0, 1.0);
  values.resize(n);
  for (auto _ : state) {
    auto res = rl::compute_gae(rewards, values, dones, 0.5, 0.99, 0.95);
    benchmark::DoNotOptimize(res);
  }
}
BENCHMARK(BM_Gae)->Arg(64)->Arg(1024);

BENCHMARK_MAIN();
