#include <benchmark/benchmark.h>

#include "drive/pipeline/sources.hpp"
#include "drive/transport/envelope.hpp"
#include "drive/transport/messages.hpp"

namespace {

void BM_EncodeFrame(benchmark::State& state) {
  const drive::Frame f = drive::pipeline::SyntheticSource::make_frame(640, 480, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(drive::transport::encode_envelope(drive::transport::encode_frame(f)));
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(f.pixels.size()));
}
BENCHMARK(BM_EncodeFrame);

void BM_DecodeFrame(benchmark::State& state) {
  const auto wire = drive::transport::encode_envelope(
      drive::transport::encode_frame(drive::pipeline::SyntheticSource::make_frame(640, 480, 5)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(drive::transport::decode_frame(drive::transport::decode_envelope(wire)));
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(wire.size()));
}
BENCHMARK(BM_DecodeFrame);

}  // namespace
