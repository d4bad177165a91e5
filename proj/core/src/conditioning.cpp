#include "drive/conditioning.hpp"

#include <algorithm>
#include <cmath>

#include "drive/error.hpp"
#include "drive/transport/messages.hpp"
#include "drive/transport/wire.hpp"

namespace drive::conditioning {

namespace {

// tan(22.5 deg): orientation bins are 45 degrees wide centered on the axes.
constexpr double kTan22 = 0.41421356237309503;

GrayImage gray_of(const Frame& frame) {
  if (!frame.valid()) throw InvalidArgument("malformed frame");
  if (frame.format == PixelFormat::kGray8) {
    GrayImage g(frame.width, frame.height);
    g.data = frame.pixels;
    return g;
  }
  return to_gray_image(frame);
}

ConditionMap make_map(const Frame& frame, const GrayImage& edges, const CannyParams& params) {
  ConditionMap m;
  m.frame_id = frame.id;
  m.width = edges.width;
  m.height = edges.height;
  m.data = edges.data;
  m.params = params;
  return m;
}

// Non-maximum suppression followed by hysteresis; `thresholds(x, y)` yields
// the double threshold for a pixel.
template <typename ThresholdFn>
GrayImage suppress_and_link(const Gradients& g, ThresholdFn&& thresholds) {
  const std::uint32_t w = g.magnitude.width;
  const std::uint32_t h = g.magnitude.height;
  auto mag_at = [&](std::int64_t x, std::int64_t y) -> float {
    if (x < 0 || y < 0 || x >= w || y >= h) return 0.0f;
    return g.magnitude.at(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y));
  };

  // 0 = none, 1 = weak, 2 = strong
  Plane<std::uint8_t> cls(w, h, 0);
  std::vector<std::uint32_t> stack;
  for (std::uint32_t y = 0; y < h; ++y) {
    for (std::uint32_t x = 0; x < w; ++x) {
      const float m = g.magnitude.at(x, y);
      if (m <= 0.0f) continue;
      const Thresholds t = thresholds(x, y);
      if (m < t.low) continue;

      // Step toward the gradient (dark to bright). A pixel survives when it is
      // strictly above the neighbor behind it and not below the one ahead, so
      // plateaus of two equal maxima keep exactly one pixel, and which one
      // follows the gradient sign rather than the scan order.
      const int sx = (g.gx.at(x, y) > 0) - (g.gx.at(x, y) < 0);
      const int sy = (g.gy.at(x, y) > 0) - (g.gy.at(x, y) < 0);
      int dx = 0;
      int dy = 0;
      switch (g.direction.at(x, y)) {
        case 0: dx = sx; break;
        case 90: dy = sy; break;
        default: dx = sx; dy = sy; break;
      }
      const float behind = mag_at(std::int64_t{x} - dx, std::int64_t{y} - dy);
      const float ahead = mag_at(std::int64_t{x} + dx, std::int64_t{y} + dy);
      if (!(m > behind && m >= ahead)) continue;

      if (m >= t.high) {
        cls.at(x, y) = 2;
        stack.push_back(y * w + x);
      } else {
        cls.at(x, y) = 1;
      }
    }
  }

  GrayImage out(w, h, 0);
  for (std::uint32_t idx : stack) out.data[idx] = 255;
  while (!stack.empty()) {
    const std::uint32_t idx = stack.back();
    stack.pop_back();
    const std::int64_t cx = idx % w;
    const std::int64_t cy = idx / w;
    for (int oy = -1; oy <= 1; ++oy) {
      for (int ox = -1; ox <= 1; ++ox) {
        const std::int64_t nx = cx + ox;
        const std::int64_t ny = cy + oy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        const std::size_t n = static_cast<std::size_t>(ny) * w + static_cast<std::size_t>(nx);
        if (cls.data[n] == 1 && out.data[n] == 0) {
          out.data[n] = 255;
          stack.push_back(static_cast<std::uint32_t>(n));
        }
      }
    }
  }
  return out;
}

void check_thresholds(double low, double high) {
  if (!(std::isfinite(low) && std::isfinite(high) && low < high)) {
    throw InvalidArgument("canny thresholds must satisfy low < high");
  }
}

}  // namespace

std::size_t ConditionMap::edge_count() const noexcept {
  return static_cast<std::size_t>(std::count(data.begin(), data.end(), std::uint8_t{255}));
}

void ThresholdField::validate() const {
  if (!(r_inner >= 0.0 && r_inner < r_outer)) {
    throw InvalidArgument("threshold field requires 0 <= r_inner < r_outer");
  }
  if (!(fine.low < fine.high) || !(coarse.low < coarse.high)) {
    throw InvalidArgument("threshold field pairs require low < high");
  }
}

Thresholds ThresholdField::at_distance(double d) const noexcept {
  if (d <= r_inner) return fine;
  if (d >= r_outer) return coarse;
  const double f = (d - r_inner) / (r_outer - r_inner);
  return Thresholds{fine.low + (coarse.low - fine.low) * f,
                    fine.high + (coarse.high - fine.high) * f};
}

Thresholds ThresholdField::at_pixel(std::uint32_t x, std::uint32_t y) const noexcept {
  return at_distance(std::hypot(x - focus_x, y - focus_y));
}

GrayImage to_gray_image(const Frame& frame) {
  if (!frame.valid() || frame.format != PixelFormat::kRgb8) {
    throw InvalidArgument("grayscale conversion needs an RGB8 frame");
  }
  GrayImage g(frame.width, frame.height);
  const std::uint8_t* src = frame.pixels.data();
  // Weights in thousandths keep the half-up rounding exact; the floating
  // form misrounds sums that land exactly on .5.
  for (auto& v : g.data) {
    const unsigned acc = 299u * src[0] + 587u * src[1] + 114u * src[2];
    v = static_cast<std::uint8_t>((acc + 500u) / 1000u);
    src += 3;
  }
  return g;
}

Frame to_grayscale(const Frame& frame) {
  GrayImage g = to_gray_image(frame);
  return Frame{frame.id, frame.ts_ns, frame.width, frame.height, PixelFormat::kGray8,
               std::move(g.data), frame.source_id};
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("sigma must be positive");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
  const std::vector<double> k = gaussian_kernel(sigma);
  const int r = static_cast<int>(k.size() / 2);
  const std::uint32_t w = img.width;
  const std::uint32_t h = img.height;
  if (w == 0 || h == 0) return img;

  Plane<double> tmp(w, h);
  for (std::uint32_t y = 0; y < h; ++y) {
    for (std::uint32_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[static_cast<std::size_t>(i + r)] * img.clamped(std::int64_t{x} + i, y);
      tmp.at(x, y) = acc;
    }
  }
  GrayImage out(w, h);
  for (std::uint32_t y = 0; y < h; ++y) {
    for (std::uint32_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[static_cast<std::size_t>(i + r)] * tmp.clamped(x, std::int64_t{y} + i);
      out.at(x, y) = saturate_round(acc);
    }
  }
  return out;
}

Gradients sobel_gradients(const GrayImage& img) {
  if (img.width < 3 || img.height < 3) throw InvalidArgument("sobel needs at least 3x3 pixels");
  const std::uint32_t w = img.width;
  const std::uint32_t h = img.height;
  Gradients g{Plane<std::int16_t>(w, h), Plane<std::int16_t>(w, h), Plane<float>(w, h),
              Plane<std::uint8_t>(w, h)};
  for (std::uint32_t y = 0; y < h; ++y) {
    for (std::uint32_t x = 0; x < w; ++x) {
      const std::int64_t xi = x;
      const std::int64_t yi = y;
      auto p = [&](int dx, int dy) -> int { return img.clamped(xi + dx, yi + dy); };
      const int gx = (p(1, -1) + 2 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2 * p(-1, 0) + p(-1, 1));
      const int gy = (p(-1, 1) + 2 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2 * p(0, -1) + p(1, -1));
      g.gx.at(x, y) = static_cast<std::int16_t>(gx);
      g.gy.at(x, y) = static_cast<std::int16_t>(gy);
      g.magnitude.at(x, y) = static_cast<float>(std::sqrt(double(gx) * gx + double(gy) * gy));
      const double ax = std::abs(gx);
      const double ay = std::abs(gy);
      std::uint8_t dir;
      if (ay <= kTan22 * ax) {
        dir = 0;
      } else if (ax <= kTan22 * ay) {
        dir = 90;
      } else {
        dir = (gx > 0) == (gy > 0) ? 45 : 135;
      }
      g.direction.at(x, y) = dir;
    }
  }
  return g;
}

ConditionMap canny(const Frame& frame, const CannyParams& params) {
  check_thresholds(params.low, params.high);
  const GrayImage blurred = gaussian_blur(gray_of(frame), params.sigma);
  const Gradients g = sobel_gradients(blurred);
  const Thresholds t{params.low, params.high};
  const GrayImage edges = suppress_and_link(g, [&](std::uint32_t, std::uint32_t) { return t; });
  return make_map(frame, edges, params);
}

ConditionMap canny(const Frame& frame, double low, double high, double sigma) {
  return canny(frame, CannyParams{low, high, sigma});
}

ConditionMap canny_spatially_varying(const Frame& frame, const ThresholdField& field, double sigma) {
  field.validate();
  const GrayImage blurred = gaussian_blur(gray_of(frame), sigma);
  const Gradients g = sobel_gradients(blurred);
  const GrayImage edges = suppress_and_link(
      g, [&](std::uint32_t x, std::uint32_t y) { return field.at_pixel(x, y); });
  return make_map(frame, edges, CannyParams{field.fine.low, field.fine.high, sigma});
}

std::vector<std::uint8_t> encode_condition_payload(const ConditionMap& map) {
  if (map.width > 0xffff || map.height > 0xffff ||
      map.data.size() != std::size_t{map.width} * map.height) {
    throw InvalidArgument("malformed condition map");
  }
  transport::ByteWriter w;
  w.u64(map.frame_id);
  w.u16(static_cast<std::uint16_t>(map.width));
  w.u16(static_cast<std::uint16_t>(map.height));
  w.bytes(map.data);
  return w.take();
}

ConditionMap decode_condition_payload(std::span<const std::uint8_t> payload) {
  transport::ByteReader r(payload);
  ConditionMap m;
  m.frame_id = r.u64();
  m.width = r.u16();
  m.height = r.u16();
  if (r.remaining() != std::size_t{m.width} * m.height) {
    throw transport::ProtocolError(transport::ProtocolErrc::kMalformedPayload,
                                   "condition map size disagrees with geometry");
  }
  const auto px = r.rest();
  m.data.assign(px.begin(), px.end());
  return m;
}

transport::Envelope encode_condition(const ConditionMap& map) {
  return transport::Envelope{transport::MsgType::kConditionMap, encode_condition_payload(map)};
}

ConditionMap decode_condition(const transport::Envelope& env) {
  transport::expect_type(env, transport::MsgType::kConditionMap);
  return decode_condition_payload(env.payload);
}

Frame condition_to_frame(const ConditionMap& map, std::uint64_t ts_ns) {
  return Frame::make(map.frame_id, ts_ns, map.width, map.height, PixelFormat::kGray8, map.data,
                     "condition");
}

}  // namespace drive::conditioning
