#include "plume/metrics.hpp"
#include "plume/nn/network.hpp"
#include "plume/rl/ppo.hpp"
#include "plume/sensor.hpp"
#include "plume/sim.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace plume;

namespace {

sim::World developed_world() {
  sim::World w(sim::WindScenario::preset(sim::ScenarioKind::UH), sim::PhysicsConfig{}, 1);
  w.advance_plume(120.0);
  w.drone().position = {0.0, 20.0, 25.0};
  w.drone().gimbal = sim::CameraMount::down;
  return w;
}

void BM_PlumeTick(benchmark::State& st) {
  auto w = developed_world();
  for (auto _ : st) w.step({});
}
BENCHMARK(BM_PlumeTick);

void BM_RenderMask(benchmark::State& st) {
  const auto w = developed_world();
  const sensor::CameraModel cam{static_cast<int>(st.range(0)), static_cast<int>(st.range(0)), st.range(0) / 2.0};
  for (auto _ : st) benchmark::DoNotOptimize(sensor::render_mask(w.plume(), w.drone(), cam, 0.02));
}
BENCHMARK(BM_RenderMask)->Arg(64)->Arg(320);

sensor::SegMask bent_band(int n) {
  sensor::SegMask m(n, n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const double c = n / 2.0 + 0.2 * n * std::sin(6.0 * y / n);
      if (std::abs(x - c) < 0.06 * n + 0.04 * y) m.set(x, y);
    }
  m.refresh();
  return m;
}

void BM_Thin(benchmark::State& st) {
  const auto m = bent_band(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(metrics::thin(m));
}
BENCHMARK(BM_Thin)->Arg(64)->Arg(320);

void BM_Skeleton(benchmark::State& st) {
  const auto m = bent_band(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(metrics::skeleton(m));
}
BENCHMARK(BM_Skeleton)->Arg(64)->Arg(320);

void BM_Forward(benchmark::State& st) {
  const auto spec = nn::NetworkSpec::desk();
  Rng rng(3);
  const auto p = nn::init_parameters<float>(spec, rng);
  const int b = static_cast<int>(st.range(0));
  nn::Tensor<float> x({b, spec.height, spec.width, 1});
  for (std::size_t i = 0; i < x.size(); ++i) x.data[i] = (i * 2654435761u) % 7 == 0;
  for (auto _ : st) benchmark::DoNotOptimize(nn::forward(spec, p, x));
  st.SetItemsProcessed(st.iterations() * b);
}
BENCHMARK(BM_Forward)->Arg(1)->Arg(256);

void BM_ForwardBackward(benchmark::State& st) {
  const auto spec = nn::NetworkSpec::desk();
  Rng rng(3);
  const auto p = nn::init_parameters<float>(spec, rng);
  const int b = static_cast<int>(st.range(0));
  nn::Tensor<float> x({b, spec.height, spec.width, 1});
  for (std::size_t i = 0; i < x.size(); ++i) x.data[i] = (i * 2654435761u) % 7 == 0;
  const std::vector<float> dl(static_cast<std::size_t>(b) * spec.actions, 0.1f), dv(b, 0.1f);
  for (auto _ : st) {
    const auto f = nn::forward(spec, p, x);
    benchmark::DoNotOptimize(nn::backward<float>(spec, p, f.cache, dl, dv));
  }
  st.SetItemsProcessed(st.iterations() * b);
}
BENCHMARK(BM_ForwardBackward)->Arg(256);

void BM_Infer(benchmark::State& st) {
  const auto spec = nn::NetworkSpec::desk();
  Rng rng(3);
  const auto p = nn::init_parameters<float>(spec, rng);
  const auto m = bent_band(spec.width);
  for (auto _ : st) benchmark::DoNotOptimize(rl::infer(spec, p, m));
}
BENCHMARK(BM_Infer);

}  // namespace

BENCHMARK_MAIN();
