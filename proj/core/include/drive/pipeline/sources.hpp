#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "drive/frame.hpp"
#include "drive/manifest.hpp"

namespace drive::pipeline {

/// Pull-based frame producer. pace() blocks until the next frame is due;
/// next() produces it, or nullopt once exhausted. Keeping the two apart lets
/// the pipeline time frame production without the pacing wait.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual void pace() {}
  virtual std::optional<Frame> next() = 0;
};

// Sleeps so that successive ticks are `period` apart (period 0: no pacing).
class Pacer {
 public:
  explicit Pacer(double fps);
  void wait();

 private:
  std::chrono::nanoseconds period_{0};
  std::chrono::steady_clock::time_point next_{};
  bool started_ = false;
};

// Plays an in-memory list of frames at a fixed rate.
class VectorSource final : public FrameSource {
 public:
  VectorSource(std::vector<Frame> frames, double fps);
  void pace() override;
  std::optional<Frame> next() override;

 private:
  std::vector<Frame> frames_;
  std::size_t pos_ = 0;
  Pacer pacer_;
};

// Moving test pattern (gradients plus a bright bar), `count` frames.
class SyntheticSource final : public FrameSource {
 public:
  SyntheticSource(std::uint32_t width, std::uint32_t height, std::uint64_t count, double fps,
                  std::string source_id = "synthetic");
  void pace() override;
  std::optional<Frame> next() override;

  static Frame make_frame(std::uint32_t width, std::uint32_t height, std::uint64_t index);

 private:
  std::uint32_t width_;
  std::uint32_t height_;
  std::uint64_t count_;
  std::uint64_t produced_ = 0;
  std::string source_id_;
  Pacer pacer_;
};

// Replays PNM files listed in a manifest. fps > 0 paces at that rate; fps == 0
// follows the manifest timestamps; fps < 0 plays unpaced.
class ReplaySource final : public FrameSource {
 public:
  ReplaySource(FrameManifest manifest, double fps, std::string source_id = "replay");
  void pace() override;
  std::optional<Frame> next() override;

 private:
  FrameManifest manifest_;
  std::size_t pos_ = 0;
  double fps_;
  std::string source_id_;
  Pacer pacer_;
  std::chrono::steady_clock::time_point t0_{};
};

}  // namespace drive::pipeline
