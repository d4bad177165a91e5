#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <vector>

#include "drive/conditioning.hpp"
#include "drive/config.hpp"
#include "drive/pipeline/latest_cell.hpp"
#include "drive/pipeline/metrics.hpp"
#include "drive/pipeline/sources.hpp"
#include "drive/stylizer.hpp"
#include "drive/transport/broker.hpp"

namespace drive::pipeline {

struct EmittedFrame {
  Frame raw;  // resized to the configured resolution
  conditioning::ConditionMap condition;
  Frame styled;
  LatencyRecord record;
};

using FrameSink = std::function<void(const EmittedFrame&)>;
using MetricsSink = std::function<void(const MetricsSnapshot&)>;

struct PipelineOptions {
  // Lockstep replaces latest-value coalescing with blocking hand-off so every
  // source frame is emitted; used for deterministic replays.
  bool lockstep = false;
  std::chrono::milliseconds metrics_period{500};
  std::chrono::milliseconds fps_window{3000};
  std::uint16_t steps = 1;
  float strength = 0.6f;
  std::string style_id = "thunderhill";
  bool keep_records = false;
};

struct PipelineStats {
  std::uint64_t frames_in = 0;
  std::uint64_t frames_out = 0;
  std::uint64_t dropped_coalesced = 0;
  std::uint64_t dropped_timeout = 0;
  std::uint64_t passthrough = 0;
  std::uint64_t max_resident = 0;
  std::chrono::nanoseconds elapsed{0};  // first input to last emit
  LatencyHistogram latency;
  std::vector<LatencyRecord> records;  // only with keep_records

  std::uint64_t dropped() const noexcept { return dropped_coalesced + dropped_timeout; }
  double drop_rate() const noexcept {
    return frames_in ? static_cast<double>(dropped()) / static_cast<double>(frames_in) : 0.0;
  }
  double output_fps() const noexcept;
};

/// Source -> condition -> stylize -> publish, three stages joined by
/// LatestCells:
///
///   pump:       source.next() -> source cell
///   dispatch:   source cell -> resize -> edge map -> stylize -> display cell
///   publisher:  display cell -> sinks, latency bookkeeping, metrics
///
/// A frame that arrives while the dispatcher is busy overwrites the one
/// waiting in the source cell, so at most three frames are resident (source
/// cell, in flight, display cell) and throughput settles at
/// min(input rate, 1 / stylize cost).
class Pipeline {
 public:
  Pipeline(PipelineConfig config, std::shared_ptr<FrameSource> source,
           std::shared_ptr<stylizer::Stylizer> stylizer, PipelineOptions options = {});

  void add_sink(FrameSink sink);
  void set_metrics_sink(MetricsSink sink);

  // Take effect on the next frame the dispatcher picks up.
  void set_enhancement(bool enabled) noexcept { enhancement_.store(enabled); }
  bool enhancement() const noexcept { return enhancement_.load(); }
  void set_threshold_field(std::optional<conditioning::ThresholdField> field);

  // Runs until the source is exhausted (after draining) or `st` is stopped.
  // A Pipeline runs once.
  PipelineStats run(std::stop_token st = {});

  MetricsSnapshot snapshot() const;
  std::uint64_t resident() const noexcept { return resident_.load(); }

 private:
  using Clock = std::chrono::steady_clock;

  struct Captured {
    Frame frame;
    Clock::time_point capture_start;
    std::uint64_t capture_ns = 0;
  };
  struct Staged {
    EmittedFrame out;
    Clock::time_point capture_start;
    Clock::time_point offered_at;
  };

  void pump(std::stop_token st);
  void dispatch(std::stop_token st);
  void publish_loop(std::stop_token st);
  void add_resident(std::int64_t delta) noexcept;
  void record_drop(const LatencyRecord& rec, bool timeout);

  PipelineConfig config_;
  std::shared_ptr<FrameSource> source_;
  std::shared_ptr<stylizer::Stylizer> stylizer_;
  PipelineOptions options_;
  stylizer::SeedPolicy seed_policy_;
  std::vector<FrameSink> sinks_;
  MetricsSink metrics_sink_;

  std::atomic<bool> enhancement_;
  mutable std::mutex field_mu_;
  std::optional<conditioning::ThresholdField> field_;

  MetricsAggregator metrics_;
  std::atomic<std::int64_t> resident_{0};
  std::atomic<std::int64_t> max_resident_{0};

  std::mutex stats_mu_;
  PipelineStats stats_;
  Clock::time_point first_input_{};
  Clock::time_point last_emit_{};
  bool have_input_ = false;

  LatestCell<Captured> source_cell_;
  LatestCell<Staged> display_cell_;
  std::atomic<bool> ran_{false};
};

// Convenience wrapper for one-shot runs.
PipelineStats run_pipeline(const PipelineConfig& config, std::shared_ptr<FrameSource> source,
                           std::shared_ptr<stylizer::Stylizer> stylizer,
                           std::vector<FrameSink> sinks, std::stop_token st = {},
                           PipelineOptions options = {});

// Publishes raw, condition and styled frames on their topics.
FrameSink broker_sink(transport::Broker& broker);
MetricsSink broker_metrics_sink(transport::Broker& broker);

}  // namespace drive::pipeline
