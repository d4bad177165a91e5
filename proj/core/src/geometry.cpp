#include "drive/geometry.hpp"

#include <algorithm>

namespace drive {

double polyline_length(const Polyline& p) noexcept {
  double total = 0.0;
  for (std::size_t i = 1; i < p.size(); ++i) total += distance(p[i - 1], p[i]);
  return total;
}

namespace {

int orientation(Vec2 a, Vec2 b, Vec2 c) noexcept {
  const double v = cross(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) noexcept {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

}  // namespace

bool segments_intersect(const Segment& s, const Segment& t) noexcept {
  const int o1 = orientation(s.a, s.b, t.a);
  const int o2 = orientation(s.a, s.b, t.b);
  const int o3 = orientation(t.a, t.b, s.a);
  const int o4 = orientation(t.a, t.b, s.b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(s.a, s.b, t.a)) return true;
  if (o2 == 0 && on_segment(s.a, s.b, t.b)) return true;
  if (o3 == 0 && on_segment(t.a, t.b, s.a)) return true;
  if (o4 == 0 && on_segment(t.a, t.b, s.b)) return true;
  return false;
}

ClosestPoint closest_on_segment(Vec2 p, const Segment& s) noexcept {
  const Vec2 d = s.b - s.a;
  const double len2 = dot(d, d);
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
  return {distance(p, s.a + d * t), t};
}

}  // namespace drive
