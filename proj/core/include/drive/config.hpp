#pragma once

#include <cstdint>
#include <string>

namespace drive {

inline constexpr std::uint32_t kDefaultWidth = 640;
inline constexpr std::uint32_t kDefaultHeight = 480;
inline constexpr double kDefaultTargetFps = 10.0;
inline constexpr double kDefaultCannyLow = 50.0;
inline constexpr double kDefaultCannyHigh = 150.0;
inline constexpr double kDefaultCannySigma = 1.0;
inline constexpr std::uint64_t kDefaultSeed = 42;

struct PipelineConfig {
  std::uint32_t width = kDefaultWidth;
  std::uint32_t height = kDefaultHeight;
  double target_fps = kDefaultTargetFps;
  std::uint64_t seed = kDefaultSeed;
  double canny_low = kDefaultCannyLow;
  double canny_high = kDefaultCannyHigh;
  double canny_sigma = kDefaultCannySigma;
  std::string worker_endpoint = "127.0.0.1:7073";
  bool enhancement_enabled = true;

  // Throws InvalidArgument naming the first violated constraint.
  void validate() const;
};

}  // namespace drive
