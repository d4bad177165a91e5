#include <benchmark/benchmark.h>

#include "drive/conditioning.hpp"
#include "drive/pipeline/sources.hpp"

namespace {

drive::Frame frame_of(benchmark::State& state) {
  const auto w = static_cast<std::uint32_t>(state.range(0));
  return drive::pipeline::SyntheticSource::make_frame(w, w * 3 / 4, 3);
}

void BM_Canny(benchmark::State& state) {
  const drive::Frame f = frame_of(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(drive::conditioning::canny(f, 50, 150, 1.0));
  }
  state.SetItemsProcessed(state.iterations() * f.width * f.height);
}
BENCHMARK(BM_Canny)->Arg(320)->Arg(640)->Unit(benchmark::kMillisecond);

void BM_GaussianBlur(benchmark::State& state) {
  const auto gray = drive::conditioning::to_gray_image(frame_of(state));
  for (auto _ : state) {
    benchmark::DoNotOptimize(drive::conditioning::gaussian_blur(gray, 1.0));
  }
}
BENCHMARK(BM_GaussianBlur)->Arg(640)->Unit(benchmark::kMillisecond);

void BM_ResizeBilinear(benchmark::State& state) {
  const drive::Frame f = drive::pipeline::SyntheticSource::make_frame(1280, 720, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(drive::resize_bilinear(f, 640, 480));
  }
}
BENCHMARK(BM_ResizeBilinear)->Unit(benchmark::kMillisecond);

}  // namespace
