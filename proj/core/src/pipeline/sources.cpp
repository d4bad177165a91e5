#include "drive/pipeline/sources.hpp"

#include <cmath>
#include <thread>

#include "drive/ppm.hpp"

namespace drive::pipeline {

using Clock = std::chrono::steady_clock;

Pacer::Pacer(double fps) {
  if (fps > 0.0) {
    period_ = std::chrono::nanoseconds(static_cast<std::int64_t>(std::llround(1e9 / fps)));
  }
}

void Pacer::wait() {
  if (period_.count() == 0) return;
  if (!started_) {
    started_ = true;
    next_ = Clock::now() + period_;
    return;
  }
  std::this_thread::sleep_until(next_);
  next_ += period_;
}

namespace {

std::uint64_t now_ns() {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now().time_since_epoch()).count());
}

}  // namespace

VectorSource::VectorSource(std::vector<Frame> frames, double fps)
    : frames_(std::move(frames)), pacer_(fps) {}

void VectorSource::pace() {
  if (pos_ < frames_.size()) pacer_.wait();
}

std::optional<Frame> VectorSource::next() {
  if (pos_ >= frames_.size()) return std::nullopt;
  return frames_[pos_++];
}

SyntheticSource::SyntheticSource(std::uint32_t width, std::uint32_t height, std::uint64_t count,
                                 double fps, std::string source_id)
    : width_(width), height_(height), count_(count), source_id_(std::move(source_id)), pacer_(fps) {}

Frame SyntheticSource::make_frame(std::uint32_t width, std::uint32_t height, std::uint64_t index) {
  Frame f = Frame::blank(width, height);
  const std::uint32_t bar = static_cast<std::uint32_t>((index * 7) % std::max<std::uint32_t>(width, 1));
  for (std::uint32_t y = 0; y < height; ++y) {
    std::uint8_t* px = f.at(0, y);
    const auto g = static_cast<std::uint8_t>(y * 255 / std::max<std::uint32_t>(height - 1, 1));
    for (std::uint32_t x = 0; x < width; ++x, px += 3) {
      const bool on_bar = x >= bar && x < bar + width / 16;
      px[0] = on_bar ? 250 : static_cast<std::uint8_t>((x + index) & 0xff);
      px[1] = on_bar ? 250 : g;
      px[2] = on_bar ? 40 : static_cast<std::uint8_t>(((x ^ y) >> 3) * 8);
    }
  }
  return f;
}

void SyntheticSource::pace() {
  if (produced_ < count_) pacer_.wait();
}

std::optional<Frame> SyntheticSource::next() {
  if (produced_ >= count_) return std::nullopt;
  Frame f = make_frame(width_, height_, produced_);
  f.id = ++produced_;
  f.ts_ns = now_ns();
  f.source_id = source_id_;
  return f;
}

ReplaySource::ReplaySource(FrameManifest manifest, double fps, std::string source_id)
    : manifest_(std::move(manifest)), fps_(fps), source_id_(std::move(source_id)),
      pacer_(fps > 0.0 ? fps : 0.0) {}

void ReplaySource::pace() {
  if (pos_ >= manifest_.entries.size()) return;
  const ManifestEntry& e = manifest_.entries[pos_];
  if (fps_ > 0.0) {
    pacer_.wait();
  } else if (fps_ == 0.0) {
    if (pos_ == 0) t0_ = Clock::now();
    const auto offset = std::chrono::nanoseconds(e.ts_ns - manifest_.entries.front().ts_ns);
    std::this_thread::sleep_until(t0_ + offset);
  }
}

std::optional<Frame> ReplaySource::next() {
  if (pos_ >= manifest_.entries.size()) return std::nullopt;
  const ManifestEntry& e = manifest_.entries[pos_];
  ++pos_;
  return load_pnm(manifest_.resolve(e), pos_, e.ts_ns, source_id_);
}

}  // namespace drive::pipeline
