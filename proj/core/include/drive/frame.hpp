#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace drive {

enum class PixelFormat : std::uint8_t { kRgb8 = 0, kGray8 = 1 };

constexpr std::size_t channel_count(PixelFormat f) noexcept {
  return f == PixelFormat::kRgb8 ? 3 : 1;
}

/// The unit flowing through every pipeline stage. Row-major, top-left origin.
///
/// Frames are plain values: once built with make() they satisfy
/// pixels.size() == width * height * channel_count(format).
struct Frame {
  std::uint64_t id = 0;
  std::uint64_t ts_ns = 0;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  PixelFormat format = PixelFormat::kRgb8;
  std::vector<std::uint8_t> pixels;
  std::string source_id;

  // Throws InvalidArgument when the buffer length does not match the geometry.
  static Frame make(std::uint64_t id, std::uint64_t ts_ns, std::uint32_t width,
                    std::uint32_t height, PixelFormat format,
                    std::vector<std::uint8_t> pixels, std::string source_id = {});

  // Zero-filled frame of the given geometry.
  static Frame blank(std::uint32_t width, std::uint32_t height,
                     PixelFormat format = PixelFormat::kRgb8);

  bool valid() const noexcept;
  std::size_t channels() const noexcept { return channel_count(format); }
  std::size_t stride() const noexcept { return static_cast<std::size_t>(width) * channels(); }

  std::uint8_t* at(std::uint32_t x, std::uint32_t y) noexcept {
    return pixels.data() + y * stride() + x * channels();
  }
  const std::uint8_t* at(std::uint32_t x, std::uint32_t y) const noexcept {
    return pixels.data() + y * stride() + x * channels();
  }

  friend bool operator==(const Frame&, const Frame&) = default;
};

// Round-half-up to the nearest integer, saturated to [0,255]. Every image
// kernel in the library uses this rule.
inline std::uint8_t saturate_round(double v) noexcept {
  if (!(v > 0.0)) return 0;  // also maps NaN to 0
  if (v >= 254.5) return 255;
  return static_cast<std::uint8_t>(static_cast<int>(v + 0.5));
}

inline std::uint8_t saturate(int v) noexcept {
  return static_cast<std::uint8_t>(v < 0 ? 0 : (v > 255 ? 255 : v));
}

// Bilinear resampling with pixel-center alignment. Keeps id, ts and source.
Frame resize_bilinear(const Frame& frame, std::uint32_t width, std::uint32_t height);

// FNV-1a over the pixel buffer; used for stream digests.
std::uint64_t pixel_digest(std::span<const std::uint8_t> bytes,
                           std::uint64_t seed = 0xcbf29ce484222325ull) noexcept;

}  // namespace drive
