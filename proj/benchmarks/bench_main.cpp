#include <benchmark/benchmark.h>

#include <aigikit/degrade.hpp>
#include <aigikit/evalkit.hpp>
#include <aigikit/expert.hpp>
#include <aigikit/semantic.hpp>
#include <aigikit/synth.hpp>

using namespace aigikit;

namespace {

const PixelBuffer& bench_image(int side) {
  static std::map<int, PixelBuffer> cache;
  auto it = cache.find(side);
  if (it == cache.end()) {
    it = cache.emplace(side, synth_photo(42, side, side)).first;
  }
  return it->second;
}

void BM_JpegRoundTrip(benchmark::State& state) {
  const PixelBuffer& img = bench_image(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(jpeg_compress(img, 60));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_JpegRoundTrip)->Arg(64)->Arg(256);

void BM_DoubleResize(benchmark::State& state) {
  const PixelBuffer& img = bench_image(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(double_resize(img, 0.4, ResizeKernel::Bilinear));
  }
}
BENCHMARK(BM_DoubleResize)->Arg(64)->Arg(256);

void BM_GaussianBlur(benchmark::State& state) {
  const PixelBuffer& img = bench_image(256);
  const double sigma = static_cast<double>(state.range(0)) / 10.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gaussian_blur(img, sigma));
  }
}
BENCHMARK(BM_GaussianBlur)->Arg(8)->Arg(20);

void BM_HeavySpecApply(benchmark::State& state) {
  const PixelBuffer& img = bench_image(128);
  const auto spec = sample_heavy_pipeline(7, default_heavy_profile());
  for (auto _ : state) {
    benchmark::DoNotOptimize(apply_spec(spec, img));
  }
}
BENCHMARK(BM_HeavySpecApply);

void BM_ResidualFeatures(benchmark::State& state) {
  const PixelBuffer& img = bench_image(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(extract_residual_features(img));
  }
}
BENCHMARK(BM_ResidualFeatures)->Arg(64)->Arg(256);

void BM_DpoLoss(benchmark::State& state) {
  std::vector<DpoBatchItem> batch(static_cast<std::size_t>(state.range(0)));
  double v = -1.0;
  for (auto& item : batch) {
    item.logp_chosen = v;
    item.logp_rejected = v * 1.5;
    item.ref_logp_chosen = v * 0.5;
    item.ref_logp_rejected = v;
    v -= 0.1;
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(dpo_loss(batch, 0.05));
  }
}
BENCHMARK(BM_DpoLoss)->Arg(8)->Arg(256);

void BM_BalancedAccuracy(benchmark::State& state) {
  std::vector<std::pair<Label, Label>> decisions;
  for (int i = 0; i < state.range(0); ++i) {
    decisions.push_back({i % 3 ? Label::Synthetic : Label::Real,
                         i % 2 ? Label::Synthetic : Label::Real});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(balanced_accuracy(decisions));
  }
}
BENCHMARK(BM_BalancedAccuracy)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
