#include "drive/frame.hpp"

#include <algorithm>
#include <cmath>

#include "drive/error.hpp"

namespace drive {

Frame Frame::make(std::uint64_t id, std::uint64_t ts_ns, std::uint32_t width, std::uint32_t height,
                  PixelFormat format, std::vector<std::uint8_t> pixels, std::string source_id) {
  const std::size_t expected = static_cast<std::size_t>(width) * height * channel_count(format);
  if (pixels.size() != expected) {
    throw InvalidArgument("frame buffer has " + std::to_string(pixels.size()) +
                          " bytes, geometry requires " + std::to_string(expected));
  }
  return Frame{id, ts_ns, width, height, format, std::move(pixels), std::move(source_id)};
}

Frame Frame::blank(std::uint32_t width, std::uint32_t height, PixelFormat format) {
  Frame f;
  f.width = width;
  f.height = height;
  f.format = format;
  f.pixels.assign(static_cast<std::size_t>(width) * height * channel_count(format), 0);
  return f;
}

bool Frame::valid() const noexcept {
  return (format == PixelFormat::kRgb8 || format == PixelFormat::kGray8) &&
         pixels.size() == static_cast<std::size_t>(width) * height * channels();
}

namespace {

struct Tap {
  std::uint32_t lo;
  std::uint32_t hi;
  double frac;
};

// Source coordinate for output index j: (j + 0.5) * src / dst - 0.5, clamped.
std::vector<Tap> make_taps(std::uint32_t src, std::uint32_t dst) {
  std::vector<Tap> taps(dst);
  const double scale = static_cast<double>(src) / dst;
  for (std::uint32_t j = 0; j < dst; ++j) {
    double s = (j + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(src - 1));
    const auto lo = static_cast<std::uint32_t>(std::floor(s));
    const std::uint32_t hi = std::min(lo + 1, src - 1);
    taps[j] = Tap{lo, hi, s - lo};
  }
  return taps;
}

}  // namespace

Frame resize_bilinear(const Frame& frame, std::uint32_t width, std::uint32_t height) {
  if (width == 0 || height == 0) throw InvalidArgument("resize target has a zero dimension");
  if (!frame.valid() || frame.width == 0 || frame.height == 0) {
    throw InvalidArgument("resize source frame is empty or malformed");
  }
  if (width == frame.width && height == frame.height) return frame;

  Frame out = Frame::blank(width, height, frame.format);
  out.id = frame.id;
  out.ts_ns = frame.ts_ns;
  out.source_id = frame.source_id;

  const auto xs = make_taps(frame.width, width);
  const auto ys = make_taps(frame.height, height);
  const std::size_t ch = frame.channels();
  for (std::uint32_t y = 0; y < height; ++y) {
    const Tap& ty = ys[y];
    std::uint8_t* dst = out.at(0, y);
    for (std::uint32_t x = 0; x < width; ++x) {
      const Tap& tx = xs[x];
      const std::uint8_t* p00 = frame.at(tx.lo, ty.lo);
      const std::uint8_t* p01 = frame.at(tx.hi, ty.lo);
      const std::uint8_t* p10 = frame.at(tx.lo, ty.hi);
      const std::uint8_t* p11 = frame.at(tx.hi, ty.hi);
      for (std::size_t c = 0; c < ch; ++c) {
        const double top = p00[c] * (1.0 - tx.frac) + p01[c] * tx.frac;
        const double bottom = p10[c] * (1.0 - tx.frac) + p11[c] * tx.frac;
        *dst++ = saturate_round(top * (1.0 - ty.frac) + bottom * ty.frac);
      }
    }
  }
  return out;
}

std::uint64_t pixel_digest(std::span<const std::uint8_t> bytes, std::uint64_t seed) noexcept {
  std::uint64_t h = seed;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace drive
