#include <benchmark/benchmark.h>

#include "drive/simworld.hpp"

namespace {

void BM_RenderFrame(benchmark::State& state) {
  const auto track = drive::sim::make_stadium_track();
  const auto line = drive::sim::make_racing_line(drive::sim::racing_line_heuristic(track));
  const auto w = static_cast<std::uint32_t>(state.range(0));
  const drive::sim::Renderer renderer(track, line, drive::sim::CameraIntrinsics{}, w, w * 3 / 4);
  const auto start = drive::sim::start_state(track);
  for (auto _ : state) {
    benchmark::DoNotOptimize(renderer.render(start));
  }
}
BENCHMARK(BM_RenderFrame)->Arg(320)->Arg(640)->Unit(benchmark::kMillisecond);

}  // namespace
