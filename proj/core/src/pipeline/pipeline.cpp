#include "drive/pipeline/pipeline.hpp"

#include <thread>

#include "drive/error.hpp"
#include "drive/transport/messages.hpp"

namespace drive::pipeline {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t ns_between(Clock::time_point a, Clock::time_point b) {
  return b > a ? static_cast<std::uint64_t>(
                     std::chrono::duration_cast<std::chrono::nanoseconds>(b - a).count())
               : 0;
}

}  // namespace

double PipelineStats::output_fps() const noexcept {
  const double secs = std::chrono::duration<double>(elapsed).count();
  return secs > 0.0 ? static_cast<double>(frames_out) / secs : 0.0;
}

Pipeline::Pipeline(PipelineConfig config, std::shared_ptr<FrameSource> source,
                   std::shared_ptr<stylizer::Stylizer> stylizer, PipelineOptions options)
    : config_(std::move(config)),
      source_(std::move(source)),
      stylizer_(std::move(stylizer)),
      options_(std::move(options)),
      enhancement_(config_.enhancement_enabled),
      metrics_(options_.fps_window) {
  config_.validate();
  if (!source_) throw InvalidArgument("pipeline needs a frame source");
  if (!stylizer_ && config_.enhancement_enabled) {
    throw InvalidArgument("pipeline needs a stylizer when enhancement is enabled");
  }
  seed_policy_.session_seed = config_.seed;
}

void Pipeline::add_sink(FrameSink sink) { sinks_.push_back(std::move(sink)); }

void Pipeline::set_metrics_sink(MetricsSink sink) { metrics_sink_ = std::move(sink); }

void Pipeline::set_threshold_field(std::optional<conditioning::ThresholdField> field) {
  if (field) field->validate();
  std::lock_guard lock(field_mu_);
  field_ = std::move(field);
}

MetricsSnapshot Pipeline::snapshot() const { return metrics_.snapshot(Clock::now()); }

void Pipeline::add_resident(std::int64_t delta) noexcept {
  const std::int64_t now = resident_.fetch_add(delta) + delta;
  std::int64_t prev = max_resident_.load();
  while (now > prev && !max_resident_.compare_exchange_weak(prev, now)) {
  }
}

void Pipeline::record_drop(const LatencyRecord& rec, bool timeout) {
  metrics_.on_drop();
  std::lock_guard lock(stats_mu_);
  if (timeout) {
    ++stats_.dropped_timeout;
  } else {
    ++stats_.dropped_coalesced;
  }
  if (options_.keep_records) stats_.records.push_back(rec);
}

void Pipeline::pump(std::stop_token st) {
  while (!st.stop_requested()) {
    std::optional<Frame> frame;
    Clock::time_point start;
    try {
      source_->pace();
      if (st.stop_requested()) break;
      start = Clock::now();
      frame = source_->next();
    } catch (const Error&) {
      frame.reset();  // unreadable source ends the run like exhaustion
    }
    if (!frame || st.stop_requested()) break;
    const auto got = Clock::now();
    metrics_.on_input();
    {
      std::lock_guard lock(stats_mu_);
      ++stats_.frames_in;
      if (!have_input_) {
        have_input_ = true;
        first_input_ = start;
      }
    }
    Captured item{std::move(*frame), start, ns_between(start, got)};
    if (options_.lockstep) {
      add_resident(1);
      if (!source_cell_.offer_wait(std::move(item), st)) {
        add_resident(-1);
        break;
      }
      continue;
    }
    auto displaced = source_cell_.offer(std::move(item));
    if (displaced) {
      LatencyRecord rec;
      rec.frame_id = displaced->frame.id;
      rec.capture_ns = displaced->capture_ns;
      rec.dropped = true;
      record_drop(rec, false);
    } else {
      add_resident(1);
    }
  }
  source_cell_.close();
}

void Pipeline::dispatch(std::stop_token st) {
  while (auto item = source_cell_.wait_take(st)) {
    const auto t0 = Clock::now();
    EmittedFrame out;
    out.record.frame_id = item->frame.id;
    out.record.capture_ns = item->capture_ns;

    out.raw = resize_bilinear(item->frame, config_.width, config_.height);
    std::optional<conditioning::ThresholdField> field;
    {
      std::lock_guard lock(field_mu_);
      field = field_;
    }
    out.condition = field ? conditioning::canny_spatially_varying(out.raw, *field, config_.canny_sigma)
                          : conditioning::canny(out.raw, config_.canny_low, config_.canny_high,
                                                config_.canny_sigma);
    const auto t1 = Clock::now();
    out.record.condition_ns = ns_between(t0, t1);

    bool dropped = false;
    if (enhancement_.load()) {
      stylizer::StyleRequest req{out.raw, out.condition,
                                 stylizer::seed_for_frame(seed_policy_, out.raw.id), options_.steps,
                                 options_.strength, options_.style_id};
      stylizer::StyleOutcome outcome = stylizer_->stylize(req);
      const auto t2 = Clock::now();
      switch (outcome.status) {
        case stylizer::StyleStatus::kOk:
          out.styled = std::move(outcome.result->frame);
          out.record.stylize_ns = ns_between(t1, t2);
          break;
        case stylizer::StyleStatus::kDropped:
          dropped = true;
          break;
        case stylizer::StyleStatus::kUnavailable:
          out.styled = out.raw;
          out.record.passthrough = true;
          break;
      }
    } else {
      out.styled = out.raw;
      out.record.passthrough = true;
    }

    if (dropped) {
      out.record.dropped = true;
      out.record.stylize_ns = 0;
      record_drop(out.record, true);
      add_resident(-1);
      continue;
    }
    Staged staged{std::move(out), item->capture_start, Clock::now()};
    if (options_.lockstep) {
      if (!display_cell_.offer_wait(std::move(staged), st)) {
        add_resident(-1);
        break;
      }
      continue;
    }
    if (auto displaced = display_cell_.offer(std::move(staged))) {
      displaced->out.record.dropped = true;
      displaced->out.record.stylize_ns = 0;
      record_drop(displaced->out.record, false);
      add_resident(-1);
    }
  }
  display_cell_.close();
}

void Pipeline::publish_loop(std::stop_token st) {
  auto next_metrics = Clock::now() + options_.metrics_period;
  auto emit_metrics = [&] {
    if (metrics_sink_) metrics_sink_(metrics_.snapshot(Clock::now()));
  };
  for (;;) {
    std::optional<Staged> staged = display_cell_.wait_take_for(std::chrono::milliseconds(50));
    if (Clock::now() >= next_metrics) {
      emit_metrics();
      next_metrics += options_.metrics_period;
      if (next_metrics < Clock::now()) next_metrics = Clock::now() + options_.metrics_period;
    }
    if (!staged) {
      if (display_cell_.closed() && display_cell_.empty()) break;
      if (st.stop_requested()) break;
      continue;
    }
    add_resident(-1);
    const auto taken = Clock::now();
    EmittedFrame& out = staged->out;
    out.record.handoff_ns = ns_between(staged->offered_at, taken);
    for (auto& sink : sinks_) sink(out);
    const auto done = Clock::now();
    out.record.end_to_end_ns = ns_between(staged->capture_start, done);
    metrics_.on_emit(out.record, done);
    std::lock_guard lock(stats_mu_);
    ++stats_.frames_out;
    if (out.record.passthrough) ++stats_.passthrough;
    last_emit_ = done;
    if (options_.keep_records) stats_.records.push_back(out.record);
  }
  emit_metrics();
}

PipelineStats Pipeline::run(std::stop_token st) {
  if (ran_.exchange(true)) throw Error("a Pipeline instance runs only once");
  {
    std::jthread pump_thread([this](std::stop_token s) { pump(s); });
    std::jthread dispatch_thread([this](std::stop_token s) { dispatch(s); });
    std::stop_callback on_stop(st, [&] {
      pump_thread.request_stop();
      dispatch_thread.request_stop();
      source_cell_.close();
      display_cell_.close();
    });
    publish_loop(st);
    // jthread destructors join the other stages
  }
  std::lock_guard lock(stats_mu_);
  PipelineStats out = stats_;
  out.max_resident = static_cast<std::uint64_t>(max_resident_.load());
  out.latency = metrics_.histogram();
  if (have_input_ && last_emit_ > first_input_) out.elapsed = last_emit_ - first_input_;
  return out;
}

PipelineStats run_pipeline(const PipelineConfig& config, std::shared_ptr<FrameSource> source,
                           std::shared_ptr<stylizer::Stylizer> stylizer,
                           std::vector<FrameSink> sinks, std::stop_token st,
                           PipelineOptions options) {
  Pipeline p(config, std::move(source), std::move(stylizer), std::move(options));
  for (auto& s : sinks) p.add_sink(std::move(s));
  return p.run(st);
}

FrameSink broker_sink(transport::Broker& broker) {
  return [&broker](const EmittedFrame& e) {
    broker.publish(transport::Topic::kFramesRaw, transport::encode_frame(e.raw));
    broker.publish(transport::Topic::kFramesCondition, conditioning::encode_condition(e.condition));
    broker.publish(transport::Topic::kFramesStyled, transport::encode_frame(e.styled));
  };
}

MetricsSink broker_metrics_sink(transport::Broker& broker) {
  return [&broker](const MetricsSnapshot& m) {
    broker.publish(transport::Topic::kMetrics, encode_metrics(m));
  };
}

}  // namespace drive::pipeline
