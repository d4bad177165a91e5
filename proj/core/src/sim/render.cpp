#include <algorithm>
#include <array>
#include <cmath>

#include "drive/error.hpp"
#include "drive/simworld.hpp"

namespace drive::sim {

namespace {

// Chevron in arrow-local coordinates (x forward along the line, y left).
constexpr std::array<Vec2, 4> kArrowShape{{{1.5, 0.0}, {-1.0, 0.9}, {-0.4, 0.0}, {-1.0, -0.9}}};
constexpr double kArrowReach = 1.6;  // bounding radius of the chevron

bool point_in_polygon(Vec2 p, const std::array<Vec2, 4>& poly) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) {
      inside = !inside;
    }
  }
  return inside;
}

void put(std::uint8_t* px, const std::uint8_t (&c)[3]) {
  px[0] = c[0];
  px[1] = c[1];
  px[2] = c[2];
}

}  // namespace

Renderer::Renderer(TrackModel track, RacingLine line, CameraIntrinsics cam, std::uint32_t width,
                   std::uint32_t height, RenderOptions options)
    : track_(std::move(track)),
      line_(std::move(line)),
      cam_(cam),
      width_(width),
      height_(height),
      options_(options),
      index_(track_) {
  cam_.validate(width_, height_);
}

std::optional<Vec2> Renderer::ground_hit(const CameraPose& pose, std::uint32_t i, std::uint32_t j) const {
  const double dx = (double(i) + 0.5 - cam_.cx) / cam_.fx;
  const double dy = (double(j) + 0.5 - cam_.cy) / cam_.fy;
  const Vec3 d{pose.right.x * dx + pose.down.x * dy + pose.forward.x,
               pose.right.y * dx + pose.down.y * dy + pose.forward.y,
               pose.right.z * dx + pose.down.z * dy + pose.forward.z};
  if (!(d.z < 0.0)) return std::nullopt;
  const double t = -pose.position.z / d.z;
  return Vec2{pose.position.x + d.x * t, pose.position.y + d.y * t};
}

bool Renderer::inside_arrow(Vec2 p) const {
  // Arrows are sparse; a linear scan over the nearby ones is cheap enough
  // because callers only ask for points already known to be on asphalt.
  for (const ArrowMarker& a : line_.arrows) {
    const Vec2 d = p - a.position;
    if (std::abs(d.x) > kArrowReach || std::abs(d.y) > kArrowReach) continue;
    const double c = std::cos(a.heading), s = std::sin(a.heading);
    const Vec2 local{c * d.x + s * d.y, -s * d.x + c * d.y};
    if (point_in_polygon(local, kArrowShape)) return true;
  }
  return false;
}

RenderOutput Renderer::render(const VehicleState& state) const {
  const CameraPose pose = CameraPose::from_vehicle(state, cam_);
  const Palette& pal = options_.palette;
  RenderOutput out;
  out.frame = Frame::blank(width_, height_);
  out.frame.ts_ns = state.t_ns;
  out.frame.source_id = "sim";
  out.lane_mask = conditioning::GrayImage(width_, height_, 0);

  // Only arrows near the camera can be visible; prefilter once per frame.
  std::vector<ArrowMarker> near;
  const Vec2 cam_xy{state.x, state.y};
  for (const ArrowMarker& a : line_.arrows) {
    if (distance(a.position, cam_xy) <= options_.far_distance + kArrowReach) near.push_back(a);
  }
  auto on_arrow = [&](Vec2 p) {
    for (const ArrowMarker& a : near) {
      const Vec2 d = p - a.position;
      if (std::abs(d.x) > kArrowReach || std::abs(d.y) > kArrowReach) continue;
      const double c = std::cos(a.heading), s = std::sin(a.heading);
      if (point_in_polygon({c * d.x + s * d.y, -s * d.x + c * d.y}, kArrowShape)) return true;
    }
    return false;
  };

  const double hw = track_.half_width;
  const double mark_outer = hw - options_.marking_inset;
  const double mark_inner = mark_outer - options_.marking_width;
  const double far2 = options_.far_distance * options_.far_distance;
  const double mark2 = options_.marking_max_distance * options_.marking_max_distance;

  for (std::uint32_t j = 0; j < height_; ++j) {
    std::uint8_t* px = out.frame.at(0, j);
    for (std::uint32_t i = 0; i < width_; ++i, px += 3) {
      const auto hit = ground_hit(pose, i, j);
      if (!hit) {
        put(px, pal.sky);
        continue;
      }
      const Vec2 d = *hit - cam_xy;
      const double r2 = dot(d, d);
      if (r2 > far2) {
        put(px, pal.grass);
        continue;
      }
      const auto q = index_.query(*hit, hw);
      if (!q || q->distance > hw) {
        put(px, pal.grass);
        continue;
      }
      if (on_arrow(*hit)) {
        put(px, pal.arrow);
      } else if (r2 <= mark2 && q->distance >= mark_inner && q->distance <= mark_outer) {
        put(px, pal.marking);
        out.lane_mask.at(i, j) = 255;
      } else {
        put(px, pal.asphalt);
      }
    }
  }
  return out;
}

RenderOutput render_frame(const VehicleState& state, const TrackModel& track, const RacingLine& line,
                          const CameraIntrinsics& cam, std::uint32_t width, std::uint32_t height) {
  return Renderer(track, line, cam, width, height).render(state);
}

// ---- overlays --------------------------------------------------------------

RgbaImage RgbaImage::blank(std::uint32_t width, std::uint32_t height) {
  RgbaImage img;
  img.width = width;
  img.height = height;
  img.data.assign(std::size_t{width} * height * 4, 0);
  return img;
}

Frame overlay_blend(const Frame& base, const RgbaImage& overlay) {
  if (base.format != PixelFormat::kRgb8) throw InvalidArgument("overlay_blend: base must be RGB8");
  if (base.width != overlay.width || base.height != overlay.height) {
    throw InvalidArgument("overlay_blend: size mismatch");
  }
  if (overlay.data.size() != std::size_t{overlay.width} * overlay.height * 4) {
    throw InvalidArgument("overlay_blend: malformed overlay buffer");
  }
  Frame out = base;
  const std::size_t n = std::size_t{base.width} * base.height;
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint8_t* o = overlay.data.data() + k * 4;
    std::uint8_t* b = out.pixels.data() + k * 3;
    const unsigned a = o[3];
    for (int c = 0; c < 3; ++c) {
      // round-half-up of x / 255 as floor((2x + 255) / 510)
      const unsigned x = o[c] * a + b[c] * (255u - a);
      b[c] = static_cast<std::uint8_t>((2u * x + 255u) / 510u);
    }
  }
  return out;
}

RgbaImage racing_line_overlay(const Renderer& renderer, const VehicleState& state, std::uint8_t alpha) {
  const Frame frame = renderer.render(state).frame;
  RgbaImage img = RgbaImage::blank(renderer.width(), renderer.height());
  const auto& arrow = renderer.options().palette.arrow;
  for (std::uint32_t j = 0; j < img.height; ++j) {
    for (std::uint32_t i = 0; i < img.width; ++i) {
      const std::uint8_t* p = frame.at(i, j);
      if (p[0] == arrow[0] && p[1] == arrow[1] && p[2] == arrow[2]) {
        std::uint8_t* o = img.at(i, j);
        o[0] = arrow[0];
        o[1] = arrow[1];
        o[2] = arrow[2];
        o[3] = alpha;
      }
    }
  }
  return img;
}

}  // namespace drive::sim
