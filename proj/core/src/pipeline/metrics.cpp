#include "drive/pipeline/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "drive/error.hpp"
#include "drive/transport/messages.hpp"
#include "drive/transport/wire.hpp"

namespace drive::pipeline {

void LatencyHistogram::record(std::uint64_t ns) noexcept {
  const std::uint64_t bucket = ns / kBucketNs;
  ++buckets_[std::min<std::uint64_t>(bucket, kBuckets)];
  ++total_;
  max_ = std::max(max_, ns);
}

std::uint64_t LatencyHistogram::percentile(double q) const {
  if (!(q > 0.0 && q < 1.0)) throw InvalidArgument("percentile q must lie in (0,1)");
  if (total_ == 0) throw Error("percentile of an empty histogram");
  const double target = q * static_cast<double>(total_);
  std::uint64_t cumulative = 0;
  for (std::size_t i = 0; i < kBuckets; ++i) {
    cumulative += buckets_[i];
    if (static_cast<double>(cumulative) >= target) return (i + 1) * kBucketNs;
  }
  return max_;
}

transport::Envelope encode_metrics(const MetricsSnapshot& m) {
  transport::ByteWriter w;
  w.u64(m.ts_ns);
  w.u64(static_cast<std::uint64_t>(std::llround(std::max(0.0, m.achieved_fps) * 1000.0)));
  w.u32(static_cast<std::uint32_t>(std::llround(std::clamp(m.drop_rate, 0.0, 1.0) * 1e6)));
  w.u64(m.p50_ns);
  w.u64(m.p95_ns);
  w.u64(m.p99_ns);
  w.u64(m.frames_in);
  w.u64(m.frames_out);
  w.u64(m.frames_dropped);
  return transport::Envelope{transport::MsgType::kMetricsSnapshot, w.take()};
}

MetricsSnapshot decode_metrics(const transport::Envelope& env) {
  transport::expect_type(env, transport::MsgType::kMetricsSnapshot);
  transport::ByteReader r(env.payload);
  MetricsSnapshot m;
  m.ts_ns = r.u64();
  m.achieved_fps = static_cast<double>(r.u64()) / 1000.0;
  m.drop_rate = static_cast<double>(r.u32()) / 1e6;
  m.p50_ns = r.u64();
  m.p95_ns = r.u64();
  m.p99_ns = r.u64();
  m.frames_in = r.u64();
  m.frames_out = r.u64();
  m.frames_dropped = r.u64();
  r.expect_end();
  return m;
}

void MetricsAggregator::on_input() {
  std::lock_guard lock(mu_);
  ++in_;
}

void MetricsAggregator::on_drop() {
  std::lock_guard lock(mu_);
  ++dropped_;
}

void MetricsAggregator::on_emit(const LatencyRecord& rec, Clock::time_point when) {
  std::lock_guard lock(mu_);
  ++out_;
  hist_.record(rec.end_to_end_ns);
  emits_.push_back(when);
  while (!emits_.empty() && emits_.front() < when - window_) emits_.pop_front();
}

MetricsSnapshot MetricsAggregator::snapshot(Clock::time_point now) const {
  std::lock_guard lock(mu_);
  while (!emits_.empty() && emits_.front() < now - window_) emits_.pop_front();
  MetricsSnapshot s;
  s.ts_ns = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(now.time_since_epoch()).count());
  if (!emits_.empty()) {
    // Short histories are measured over their own span rather than the full window.
    const auto span = std::min<Clock::duration>(window_, now - emits_.front());
    const double secs = std::chrono::duration<double>(span).count();
    s.achieved_fps = emits_.size() > 1 && secs > 0.0
                         ? static_cast<double>(emits_.size() - 1) / secs
                         : static_cast<double>(emits_.size()) /
                               std::chrono::duration<double>(window_).count();
  }
  s.frames_in = in_;
  s.frames_out = out_;
  s.frames_dropped = dropped_;
  s.drop_rate = in_ ? static_cast<double>(dropped_) / static_cast<double>(in_) : 0.0;
  if (hist_.count() > 0) {
    s.p50_ns = hist_.percentile(0.50);
    s.p95_ns = hist_.percentile(0.95);
    s.p99_ns = hist_.percentile(0.99);
  }
  return s;
}

LatencyHistogram MetricsAggregator::histogram() const {
  std::lock_guard lock(mu_);
  return hist_;
}

}  // namespace drive::pipeline
