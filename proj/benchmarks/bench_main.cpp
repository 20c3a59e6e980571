#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "repgars/corruptor.hpp"
#include "repgars/gar_model.hpp"
#include "repgars/nn/layers.hpp"
#include "repgars/poserender.hpp"
#include "repgars/synthgen.hpp"

namespace {

using namespace repgars;

ClipSample bench_clip(int height, int width) {
  SynthConfig cfg;
  cfg.frames = 20;
  cfg.height = height;
  cfg.width = width;
  cfg.persons = 12;
  return gen_clip(0, cfg, 1);
}

void BM_RenderFrame(benchmark::State& state) {
  const int h = static_cast<int>(state.range(0));
  const ClipSample clip = bench_clip(h, h * 7 / 4);
  const auto cfg = render_config_for(clip);
  const auto dets = clip.detections_at(0);
  for (auto _ : state) benchmark::DoNotOptimize(render_frame(dets, cfg));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_RenderFrame)->Arg(64)->Arg(128);

void BM_Conv3dStem(benchmark::State& state) {
  const auto h = state.range(0);
  nn::Conv3d conv("stem", 6, 8, {3, 7, 7}, {1, 2, 2}, {1, 3, 3}, false);
  Rng rng(2);
  conv.init(rng);
  Tensor x({1, 6, 20, h, h * 7 / 4}, 0.5f);
  for (auto _ : state) benchmark::DoNotOptimize(conv.forward(x, false));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Conv3dStem)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_VideoResNetForward(benchmark::State& state) {
  ModelConfig cfg = ModelConfig::tiny(3, 6);
  auto net = build_backbone(cfg);
  Batch batch{Tensor({1, 6, 20, 64, 112}, 0.5f), {}};
  for (auto _ : state) benchmark::DoNotOptimize(net->forward(batch, false));
}
BENCHMARK(BM_VideoResNetForward)->Unit(benchmark::kMillisecond);

void BM_Corrupt(benchmark::State& state) {
  const ClipSample clip = bench_clip(128, 224);
  CorruptionConfig cfg;
  cfg.fragmentation_prob = 0.5;
  cfg.id_switch_prob = 0.3;
  cfg.jitter_sigma = 2.0;
  cfg.spurious_track_rate = 1.0;
  std::uint64_t k = 0;
  for (auto _ : state) benchmark::DoNotOptimize(corrupt_clip(clip, cfg, k++));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Corrupt);

}  // namespace

BENCHMARK_MAIN();
