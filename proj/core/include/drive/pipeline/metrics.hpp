#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <deque>
#include <mutex>

#include "drive/transport/envelope.hpp"

namespace drive::pipeline {

// Fixed 1 ms buckets covering [0, 1 s); later samples land in an overflow bucket.
class LatencyHistogram {
 public:
  static constexpr std::uint64_t kBucketNs = 1'000'000;
  static constexpr std::size_t kBuckets = 1000;

  void record(std::uint64_t ns) noexcept;
  std::uint64_t count() const noexcept { return total_; }
  std::uint64_t max_ns() const noexcept { return max_; }
  std::uint64_t bucket_count(std::size_t i) const noexcept { return buckets_[i]; }

  // Smallest bucket upper bound whose cumulative count reaches q * total.
  // Overflow samples report the largest value seen. q must lie in (0,1).
  std::uint64_t percentile(double q) const;

 private:
  std::array<std::uint64_t, kBuckets + 1> buckets_{};
  std::uint64_t total_ = 0;
  std::uint64_t max_ = 0;
};

struct LatencyRecord {
  std::uint64_t frame_id = 0;
  std::uint64_t capture_ns = 0;
  std::uint64_t condition_ns = 0;
  std::uint64_t stylize_ns = 0;  // round trip; 0 for dropped frames
  std::uint64_t handoff_ns = 0;  // display cell wait
  std::uint64_t end_to_end_ns = 0;
  bool dropped = false;
  bool passthrough = false;
};

struct MetricsSnapshot {
  std::uint64_t ts_ns = 0;
  double achieved_fps = 0.0;  // trailing window
  double drop_rate = 0.0;     // dropped / input, cumulative
  std::uint64_t p50_ns = 0;
  std::uint64_t p95_ns = 0;
  std::uint64_t p99_ns = 0;
  std::uint64_t frames_in = 0;
  std::uint64_t frames_out = 0;
  std::uint64_t frames_dropped = 0;
};

// Wire form (msg_type 6): ts u64 | fps in milli-fps u64 | drop rate in ppm
// u32 | p50 u64 | p95 u64 | p99 u64 | in u64 | out u64 | dropped u64.
transport::Envelope encode_metrics(const MetricsSnapshot& m);
MetricsSnapshot decode_metrics(const transport::Envelope& env);

/// Thread-safe accumulator behind MetricsSnapshot.
class MetricsAggregator {
 public:
  using Clock = std::chrono::steady_clock;

  explicit MetricsAggregator(std::chrono::nanoseconds window = std::chrono::seconds(3))
      : window_(window) {}

  void on_input();
  void on_drop();
  void on_emit(const LatencyRecord& rec, Clock::time_point when);

  MetricsSnapshot snapshot(Clock::time_point now) const;
  LatencyHistogram histogram() const;

 private:
  std::chrono::nanoseconds window_;
  mutable std::mutex mu_;
  LatencyHistogram hist_;
  mutable std::deque<Clock::time_point> emits_;
  std::uint64_t in_ = 0;
  std::uint64_t out_ = 0;
  std::uint64_t dropped_ = 0;
};

}  // namespace drive::pipeline
