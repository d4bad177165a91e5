#include <doctest.h>

#include <atomic>
#include <mutex>
#include <thread>

#include "drive/pipeline/latest_cell.hpp"
#include "drive/pipeline/metrics.hpp"
#include "drive/pipeline/pipeline.hpp"
#include "drive/pipeline/sources.hpp"
#include "drive/ppm.hpp"
#include "support.hpp"

using namespace drive;
using namespace drive::pipeline;
using namespace std::chrono_literals;
using drive::test::Rng;

namespace {

constexpr std::uint64_t kMs = 1'000'000;

PipelineConfig small_config(std::uint32_t w = 64, std::uint32_t h = 64) {
  PipelineConfig c;
  c.width = w;
  c.height = h;
  return c;
}

std::vector<Frame> numbered_frames(std::size_t n, std::uint32_t w, std::uint32_t h) {
  std::vector<Frame> out;
  for (std::size_t i = 0; i < n; ++i) {
    Frame f = SyntheticSource::make_frame(w, h, i);
    f.id = i + 1;
    out.push_back(std::move(f));
  }
  return out;
}

// Collects emitted frames from the publisher thread.
struct Collector {
  std::mutex mu;
  std::vector<EmittedFrame> frames;
  FrameSink sink() {
    return [this](const EmittedFrame& e) {
      std::lock_guard lock(mu);
      frames.push_back(e);
    };
  }
};

}  // namespace

TEST_CASE("latest cell replacement semantics") {
  LatestCell<int> cell;
  CHECK_FALSE(cell.take());
  CHECK_FALSE(cell.offer(1));
  CHECK(cell.offer(2) == 1);
  CHECK(cell.take() == 2);
  CHECK_FALSE(cell.take());
  for (int i = 1; i <= 1000; ++i) cell.offer(i);
  CHECK(cell.take() == 1000);
  CHECK(cell.replaced() == 1000);
  cell.close();
  CHECK(cell.closed());
  CHECK_FALSE(cell.wait_take({}));
}

TEST_CASE("latest cell under concurrency never goes backwards") {
  LatestCell<int> cell;
  std::atomic<bool> done{false};
  std::vector<int> seen;
  std::thread reader([&] {
    while (auto v = cell.wait_take({})) seen.push_back(*v);
    done = true;
  });
  for (int i = 1; i <= 20000; ++i) cell.offer(i);
  cell.close();
  reader.join();
  REQUIRE_FALSE(seen.empty());
  CHECK(seen.back() == 20000);
  CHECK(std::adjacent_find(seen.begin(), seen.end(), std::greater_equal<>()) == seen.end());
}

TEST_CASE("latest cell lossless hand-off and stop") {
  LatestCell<int> cell;
  std::stop_source stop;
  std::vector<int> got;
  std::thread reader([&] {
    while (auto v = cell.wait_take(stop.get_token())) got.push_back(*v);
  });
  for (int i = 0; i < 500; ++i) REQUIRE(cell.offer_wait(i, {}));
  while (!cell.empty()) std::this_thread::yield();
  stop.request_stop();  // wakes the blocked reader
  reader.join();
  CHECK(got.size() == 500);
  CHECK(got.back() == 499);
}

TEST_CASE("latency histogram percentiles") {
  SUBCASE("single sample") {
    LatencyHistogram h;
    h.record(5 * kMs);
    CHECK(h.percentile(0.5) == 6 * kMs);
    CHECK(h.percentile(0.99) == 6 * kMs);
  }
  SUBCASE("uniform 1..100 ms") {
    LatencyHistogram h;
    for (std::uint64_t ms = 1; ms <= 100; ++ms) h.record(ms * kMs);
    const std::uint64_t p50 = h.percentile(0.5) / kMs;
    const std::uint64_t p99 = h.percentile(0.99) / kMs;
    CHECK(p50 >= 49);
    CHECK(p50 <= 51);
    CHECK(p99 >= 98);
    CHECK(p99 <= 100);
    CHECK(h.count() == 100);
  }
  SUBCASE("overflow reports the maximum") {
    LatencyHistogram h;
    h.record(3 * kMs);
    h.record(2'500 * kMs);
    CHECK(h.percentile(0.99) == 2'500 * kMs);
    CHECK(h.max_ns() == 2'500 * kMs);
  }
  SUBCASE("percentiles are ordered for random data") {
    Rng rng(41);
    for (int trial = 0; trial < 50; ++trial) {
      LatencyHistogram h;
      const auto n = rng.integer(1, 500);
      for (std::int64_t i = 0; i < n; ++i) h.record(static_cast<std::uint64_t>(rng.integer(0, 1'500 * kMs)));
      CHECK(h.percentile(0.5) <= h.percentile(0.95));
      CHECK(h.percentile(0.95) <= h.percentile(0.99));
    }
  }
  SUBCASE("invalid queries") {
    LatencyHistogram h;
    CHECK_THROWS_AS(h.percentile(0.5), Error);
    h.record(1);
    CHECK_THROWS_AS(h.percentile(0.0), InvalidArgument);
    CHECK_THROWS_AS(h.percentile(1.0), InvalidArgument);
  }
}

TEST_CASE("metrics snapshot wire form") {
  MetricsSnapshot m;
  m.ts_ns = 123;
  m.achieved_fps = 19.875;
  m.drop_rate = 0.333333;
  m.p50_ns = 1;
  m.p95_ns = 2;
  m.p99_ns = 3;
  m.frames_in = 30;
  m.frames_out = 20;
  m.frames_dropped = 10;
  const MetricsSnapshot b = decode_metrics(encode_metrics(m));
  CHECK(b.achieved_fps == doctest::Approx(19.875).epsilon(1e-9));
  CHECK(b.drop_rate == doctest::Approx(0.333333).epsilon(1e-6));
  CHECK(b.frames_out == 20);
  CHECK(b.p99_ns == 3);
  CHECK(encode_metrics(m).payload.size() == 8 + 8 + 4 + 8 * 6);
}

TEST_CASE("pipeline passthrough when enhancement is off") {
  PipelineConfig cfg = small_config(64, 64);
  cfg.enhancement_enabled = false;
  Collector out;
  const auto stats = run_pipeline(cfg, std::make_shared<VectorSource>(numbered_frames(10, 128, 96), 0.0), nullptr,
                                  {out.sink()}, {}, PipelineOptions{.lockstep = true});
  CHECK(stats.frames_out == 10);
  CHECK(stats.passthrough == 10);
  for (const auto& e : out.frames) {
    CHECK(e.styled == e.raw);
    CHECK(e.raw.width == 64);
    CHECK(e.condition.frame_id == e.raw.id);
  }
}

TEST_CASE("identity stub at a modest rate drops nothing") {
  Collector out;
  const auto stats = run_pipeline(small_config(), std::make_shared<VectorSource>(numbered_frames(20, 64, 64), 20.0),
                                  std::make_shared<stylizer::DelayStylizer>(0ns), {out.sink()});
  CHECK(stats.frames_in == 20);
  CHECK(stats.frames_out == 20);
  CHECK(stats.dropped() == 0);
  CHECK(stats.drop_rate() == 0.0);
}

TEST_CASE("slow stylizer coalesces frames and keeps order") {
  PipelineOptions opts;
  opts.keep_records = true;
  Collector out;
  const auto stats =
      run_pipeline(small_config(), std::make_shared<VectorSource>(numbered_frames(30, 64, 64), 30.0),
                   std::make_shared<stylizer::DelayStylizer>(50ms), {out.sink()}, {}, opts);
  CHECK(stats.frames_in == 30);
  CHECK(stats.frames_out + stats.dropped() == 30);
  CHECK(stats.dropped() >= 5);
  CHECK(stats.max_resident <= 3);
  for (std::size_t i = 1; i < out.frames.size(); ++i) CHECK(out.frames[i].raw.id > out.frames[i - 1].raw.id);
  REQUIRE(stats.records.size() == 30);
  for (const auto& r : stats.records) {
    if (r.dropped) {
      CHECK(r.stylize_ns == 0);
    } else {
      CHECK(r.end_to_end_ns >= std::max({r.capture_ns, r.condition_ns, r.stylize_ns, r.handoff_ns}));
      CHECK(r.stylize_ns >= 50 * kMs);
    }
  }
}

TEST_CASE("lockstep emits every frame in order") {
  Collector out;
  const auto stats =
      run_pipeline(small_config(), std::make_shared<VectorSource>(numbered_frames(12, 64, 64), 0.0),
                   std::make_shared<stylizer::DelayStylizer>(5ms, std::make_shared<stylizer::MockStylizer>()),
                   {out.sink()}, {}, PipelineOptions{.lockstep = true});
  CHECK(stats.dropped() == 0);
  REQUIRE(out.frames.size() == 12);
  for (std::size_t i = 0; i < 12; ++i) CHECK(out.frames[i].raw.id == i + 1);
}

TEST_CASE("stop request ends a run with an endless source") {
  auto source = std::make_shared<SyntheticSource>(64, 64, UINT64_MAX, 50.0);
  Pipeline p(small_config(), source, std::make_shared<stylizer::MockStylizer>());
  std::stop_source stop;
  std::thread stopper([&] {
    std::this_thread::sleep_for(300ms);
    stop.request_stop();
  });
  const auto t0 = std::chrono::steady_clock::now();
  const auto stats = p.run(stop.get_token());
  stopper.join();
  CHECK(std::chrono::steady_clock::now() - t0 < 2s);
  CHECK(stats.frames_out > 0);
  CHECK_THROWS_AS(p.run(), Error);
}

TEST_CASE("metrics sink receives ordered percentiles") {
  std::mutex mu;
  std::vector<MetricsSnapshot> snaps;
  Pipeline p(small_config(), std::make_shared<VectorSource>(numbered_frames(20, 64, 64), 40.0),
             std::make_shared<stylizer::MockStylizer>(), PipelineOptions{.metrics_period = 100ms});
  p.set_metrics_sink([&](const MetricsSnapshot& s) {
    std::lock_guard lock(mu);
    snaps.push_back(s);
  });
  p.run();
  REQUIRE(snaps.size() >= 2);
  for (const auto& s : snaps) {
    CHECK(s.p50_ns <= s.p95_ns);
    CHECK(s.p95_ns <= s.p99_ns);
    CHECK(s.achieved_fps >= 0.0);
  }
  CHECK(snaps.back().frames_in == 20);
}

TEST_CASE("replay source follows the manifest") {
  test::TempDir dir;
  FrameManifest m;
  m.base_dir = dir.path();
  Rng rng(42);
  std::vector<Frame> frames;
  for (int i = 0; i < 5; ++i) {
    Frame f = test::random_frame(rng, 8, 6);
    f.id = 0;
    save_pnm(f, dir / ("f" + std::to_string(i) + ".ppm"));
    m.entries.push_back({"f" + std::to_string(i) + ".ppm", static_cast<std::uint64_t>(i) * 20 * kMs});
    frames.push_back(f);
  }
  SUBCASE("unpaced") {
    ReplaySource src(m, -1.0);
    for (std::uint64_t i = 0; i < 5; ++i) {
      src.pace();
      auto f = src.next();
      REQUIRE(f);
      CHECK(f->id == i + 1);
      CHECK(f->pixels == frames[i].pixels);
      CHECK(f->ts_ns == i * 20 * kMs);
    }
    CHECK_FALSE(src.next());
  }
  SUBCASE("manifest timestamps pace playback") {
    ReplaySource src(m, 0.0);
    const auto t0 = std::chrono::steady_clock::now();
    while (true) {
      src.pace();
      if (!src.next()) break;
    }
    CHECK(std::chrono::steady_clock::now() - t0 >= 80ms);
  }
}

TEST_CASE("broker sink publishes all three image topics") {
  transport::Broker broker;
  auto raw = broker.subscribe(transport::Topic::kFramesRaw);
  auto cond = broker.subscribe(transport::Topic::kFramesCondition);
  auto styled = broker.subscribe(transport::Topic::kFramesStyled);
  run_pipeline(small_config(), std::make_shared<VectorSource>(numbered_frames(3, 64, 64), 0.0),
               std::make_shared<stylizer::MockStylizer>(), {broker_sink(broker)}, {},
               PipelineOptions{.lockstep = true});
  auto r = raw->next(1s);
  auto c = cond->next(1s);
  auto s = styled->next(1s);
  REQUIRE((r && c && s));
  CHECK(transport::decode_frame(*r).id == 3);
  CHECK(conditioning::decode_condition(*c).frame_id == 3);
  CHECK(transport::decode_frame(*s).id == 3);
}
