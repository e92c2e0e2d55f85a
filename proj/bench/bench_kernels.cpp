#include <benchmark/benchmark.h>

#include <omp.h>

#include "mvcolor/oracle.hpp"
#include "mvcolor/pipeline.hpp"
#include "mvcolor/synth.hpp"
#include "mvcolor/visibility.hpp"

using namespace mvcolor;

namespace {

synth::SynthScene make_scene(int subdivisions, int side) {
  synth::SynthConfig cfg;
  cfg.subdivisions = subdivisions;
  cfg.width = cfg.height = side;
  cfg.gains = synth::sample_gains(cfg.view_count, 0.8, 1.1, 7);
  cfg.noise_sigma = 0.02;
  cfg.seed = 7;
  synth::SynthScene scene = synth::generate_scene(cfg);
  synth::render_views(scene, cfg, 1);
  return scene;
}

// Full estimate on a cube; range(0) = subdivisions, range(1) = workers (0 = all).
void BM_EstimateParallel(benchmark::State& state) {
  const auto scene = make_scene(static_cast<int>(state.range(0)), 64);
  PipelineConfig cfg;
  cfg.workers = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(estimate_face_colors(scene.mesh, scene.views, cfg));
  state.counters["faces"] = static_cast<double>(scene.mesh.face_count());
  state.counters["threads"] = cfg.workers ? cfg.workers : omp_get_max_threads();
}
BENCHMARK(BM_EstimateParallel)->Args({0, 1})->Args({0, 0})->Args({1, 1})->Args({1, 0})->Unit(benchmark::kMillisecond);

void BM_EstimateOracle(benchmark::State& state) {
  const auto scene = make_scene(static_cast<int>(state.range(0)), 64);
  for (auto _ : state) benchmark::DoNotOptimize(synth::oracle_estimate(scene.mesh, scene.views, PipelineConfig{}));
  state.counters["faces"] = static_cast<double>(scene.mesh.face_count());
}
BENCHMARK(BM_EstimateOracle)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Rasterize(benchmark::State& state) {
  const auto scene = make_scene(1, static_cast<int>(state.range(0)));
  for (auto _ : state)
    for (const auto& v : scene.views) benchmark::DoNotOptimize(rasterize_depth(scene.mesh, v));
}
BENCHMARK(BM_Rasterize)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_Raycast(benchmark::State& state) {
  const auto scene = make_scene(1, static_cast<int>(state.range(0)));
  for (auto _ : state)
    for (const auto& v : scene.views) benchmark::DoNotOptimize(synth::raycast_face_ids(scene.mesh, v));
}
BENCHMARK(BM_Raycast)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
