#pragma once

#include <cmath>
#include <vector>

namespace drive {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(Vec2 a, double s) noexcept { return {a.x * s, a.y * s}; }
  friend Vec2 operator*(double s, Vec2 a) noexcept { return {a.x * s, a.y * s}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) noexcept { return std::sqrt(a.x * a.x + a.y * a.y); }
// Euclidean distance; every metric uses this exact formula.
inline double distance(Vec2 a, Vec2 b) noexcept {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}
// Left-hand normal (counterclockwise rotation by 90 degrees).
inline Vec2 left_normal(Vec2 a) noexcept { return {-a.y, a.x}; }

using Polyline = std::vector<Vec2>;

double polyline_length(const Polyline& p) noexcept;

struct Segment {
  Vec2 a;
  Vec2 b;
};

// Proper or touching intersection of two closed segments.
bool segments_intersect(const Segment& s, const Segment& t) noexcept;

struct ClosestPoint {
  double distance = 0.0;
  double t = 0.0;  // parameter along the segment in [0,1]
};
ClosestPoint closest_on_segment(Vec2 p, const Segment& s) noexcept;

}  // namespace drive
