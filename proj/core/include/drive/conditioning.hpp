#pragma once

#include <cstdint>
#include <vector>

#include "drive/config.hpp"
#include "drive/frame.hpp"
#include "drive/transport/envelope.hpp"

namespace drive::conditioning {

/// Dense single-plane image, row-major.
template <typename T>
struct Plane {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<T> data;

  Plane() = default;
  Plane(std::uint32_t w, std::uint32_t h, T fill = T{})
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  T& at(std::uint32_t x, std::uint32_t y) noexcept { return data[std::size_t{y} * width + x]; }
  const T& at(std::uint32_t x, std::uint32_t y) const noexcept {
    return data[std::size_t{y} * width + x];
  }
  // Clamp-to-edge read.
  const T& clamped(std::int64_t x, std::int64_t y) const noexcept {
    x = x < 0 ? 0 : (x >= width ? width - 1 : x);
    y = y < 0 ? 0 : (y >= height ? height - 1 : y);
    return at(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y));
  }

  friend bool operator==(const Plane&, const Plane&) = default;
};

using GrayImage = Plane<std::uint8_t>;

struct Thresholds {
  double low = kDefaultCannyLow;
  double high = kDefaultCannyHigh;

  friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

struct CannyParams {
  double low = kDefaultCannyLow;
  double high = kDefaultCannyHigh;
  double sigma = kDefaultCannySigma;

  friend bool operator==(const CannyParams&, const CannyParams&) = default;
};

/// Edge map aligned 1:1 with its source frame; 255 marks an edge pixel.
struct ConditionMap {
  std::uint64_t frame_id = 0;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> data;
  CannyParams params;  // not carried on the wire

  std::uint8_t at(std::uint32_t x, std::uint32_t y) const noexcept {
    return data[std::size_t{y} * width + x];
  }
  std::size_t edge_count() const noexcept;

  friend bool operator==(const ConditionMap&, const ConditionMap&) = default;
};

/// Gaze-dependent threshold field: fine thresholds within r_inner of the
/// focus, coarse beyond r_outer, both bounds interpolated linearly between.
struct ThresholdField {
  double focus_x = 0.0;
  double focus_y = 0.0;
  double r_inner = 0.0;
  double r_outer = 1.0;
  Thresholds fine;
  Thresholds coarse;

  void validate() const;
  Thresholds at_distance(double d) const noexcept;
  Thresholds at_pixel(std::uint32_t x, std::uint32_t y) const noexcept;
};

struct Gradients {
  Plane<std::int16_t> gx;
  Plane<std::int16_t> gy;
  Plane<float> magnitude;
  // Quantized orientation in degrees: 0, 45, 90 or 135.
  Plane<std::uint8_t> direction;
};

GrayImage to_gray_image(const Frame& frame);
// y = round(0.299 R + 0.587 G + 0.114 B). Throws on non-RGB input.
Frame to_grayscale(const Frame& frame);

// Separable kernel of radius ceil(3 sigma), normalized, clamp-to-edge.
std::vector<double> gaussian_kernel(double sigma);
GrayImage gaussian_blur(const GrayImage& img, double sigma);

Gradients sobel_gradients(const GrayImage& img);

ConditionMap canny(const Frame& frame, double low, double high, double sigma = kDefaultCannySigma);
ConditionMap canny(const Frame& frame, const CannyParams& params);
ConditionMap canny_spatially_varying(const Frame& frame, const ThresholdField& field,
                                     double sigma = kDefaultCannySigma);

// Wire form (msg_type 2): frame_id u64 | width u16 | height u16 | GRAY8 bytes.
transport::Envelope encode_condition(const ConditionMap& map);
ConditionMap decode_condition(const transport::Envelope& env);
std::vector<std::uint8_t> encode_condition_payload(const ConditionMap& map);
ConditionMap decode_condition_payload(std::span<const std::uint8_t> payload);

// GRAY8 frame view of a condition map (for PNM export and publishing).
Frame condition_to_frame(const ConditionMap& map, std::uint64_t ts_ns = 0);

}  // namespace drive::conditioning
