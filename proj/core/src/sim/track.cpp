#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "drive/error.hpp"
#include "drive/simworld.hpp"

namespace drive::sim {

using nlohmann::json;

Vec2 TrackModel::start_direction() const noexcept {
  // Rotate (b - a) by -90 degrees: with a on the driver's right this points
  // along the direction of travel.
  const Vec2 d = start_line.b - start_line.a;
  return {d.y, -d.x};
}

void TrackModel::validate() const {
  if (centerline.size() < 4) throw InvalidArgument("track: centerline needs at least 4 points");
  if (!(half_width > 0.0)) throw InvalidArgument("track: half_width must be positive");
  if (distance(centerline.front(), centerline.back()) > 1e-6) {
    throw InvalidArgument("track: centerline is not closed");
  }
  const std::size_t n = centerline.size() - 1;  // segment count
  for (std::size_t i = 0; i < n; ++i) {
    if (distance(centerline[i], centerline[i + 1]) == 0.0) {
      throw InvalidArgument("track: repeated centerline point " + std::to_string(i));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Segment s{centerline[i], centerline[i + 1]};
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // closing neighbors share a point
      if (segments_intersect(s, {centerline[j], centerline[j + 1]})) {
        throw InvalidArgument("track: centerline self-intersects at segments " + std::to_string(i) +
                              " and " + std::to_string(j));
      }
    }
  }
  if (distance(start_line.a, start_line.b) == 0.0) throw InvalidArgument("track: degenerate start line");
}

TrackModel make_stadium_track(double length, double radius, double half_width, double spacing) {
  const double pi = std::numbers::pi;
  const double straight = (length - 2.0 * pi * radius) / 2.0;
  if (!(radius > 0.0) || !(straight > 0.0) || !(spacing > 0.0)) {
    throw InvalidArgument("stadium track: length too short for the bend radius");
  }
  const double arc = pi * radius;
  const double half = straight / 2.0;

  // Arclength parametrization starting at (0, -R) heading +x.
  auto point_at = [&](double s) -> Vec2 {
    if (s < half) return {s, -radius};
    s -= half;
    if (s < arc) {
      const double a = -pi / 2.0 + s / radius;
      return {half + radius * std::cos(a), radius * std::sin(a)};
    }
    s -= arc;
    if (s < straight) return {half - s, radius};
    s -= straight;
    if (s < arc) {
      const double a = pi / 2.0 + s / radius;
      return {-half + radius * std::cos(a), radius * std::sin(a)};
    }
    s -= arc;
    return {-half + s, -radius};
  };

  TrackModel t;
  t.half_width = half_width;
  const auto n = static_cast<std::size_t>(std::ceil(length / spacing));
  t.centerline.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) t.centerline.push_back(point_at(length * double(i) / double(n)));
  t.centerline.push_back(t.centerline.front());
  // Start line across the track at the origin; right side is -y for +x travel.
  t.start_line = {{0.0, -radius - half_width}, {0.0, -radius + half_width}};
  return t;
}

namespace {

// Signed curvature estimate at vertex i of a closed polyline.
double turn_angle(const Polyline& p, std::size_t i) {
  const std::size_t n = p.size() - 1;
  const Vec2 prev = p[(i + n - 1) % n];
  const Vec2 cur = p[i % n];
  const Vec2 next = p[(i + 1) % n];
  return std::atan2(cross(cur - prev, next - cur), dot(cur - prev, next - cur));
}

}  // namespace

Polyline racing_line_heuristic(const TrackModel& track, double apex_offset, double blend) {
  const Polyline& c = track.centerline;
  const std::size_t n = c.size() - 1;
  if (n < 3) throw InvalidArgument("racing line: centerline too short");

  // Cumulative arclength and a bend indicator per vertex.
  std::vector<double> s(n + 1, 0.0);
  for (std::size_t i = 1; i <= n; ++i) s[i] = s[i - 1] + distance(c[i - 1], c[i]);
  const double total = s[n];
  std::vector<double> bend(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = turn_angle(c, i);
    bend[i] = std::abs(a) > 1e-4 ? (a > 0 ? 1.0 : -1.0) : 0.0;
  }

  // Smooth the indicator with a raised-cosine window of half-width `blend`
  // so the offset eases in before a bend and out after it.
  const double step = total / double(n);
  const auto k = static_cast<std::ptrdiff_t>(std::ceil(blend / step));
  std::vector<double> weight(n, 0.0);
  double wsum = 0.0;
  std::vector<double> win(static_cast<std::size_t>(2 * k + 1));
  for (std::ptrdiff_t j = -k; j <= k; ++j) {
    const double w = 0.5 * (1.0 + std::cos(std::numbers::pi * double(j) / double(k + 1)));
    win[static_cast<std::size_t>(j + k)] = w;
    wsum += w;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t j = -k; j <= k; ++j) {
      const auto idx = static_cast<std::size_t>((static_cast<std::ptrdiff_t>(i) + j +
                                                 static_cast<std::ptrdiff_t>(n) * 4) %
                                                static_cast<std::ptrdiff_t>(n));
      acc += bend[idx] * win[static_cast<std::size_t>(j + k)];
    }
    weight[i] = acc / wsum;
  }

  Polyline out;
  out.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 prev = c[(i + n - 1) % n];
    const Vec2 next = c[i + 1];
    Vec2 tangent = next - prev;
    tangent = tangent * (1.0 / norm(tangent));
    out.push_back(c[i] + left_normal(tangent) * (apex_offset * weight[i]));
  }
  out.push_back(out.front());
  return out;
}

RacingLine make_racing_line(Polyline polyline, double arrow_spacing) {
  if (polyline.size() < 2) throw InvalidArgument("racing line: needs at least 2 points");
  if (!(arrow_spacing > 0.0)) throw InvalidArgument("racing line: arrow spacing must be positive");
  RacingLine line;
  line.arrow_spacing = arrow_spacing;
  double next_at = 0.0;
  double s = 0.0;
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    const Vec2 a = polyline[i - 1];
    const Vec2 b = polyline[i];
    const double len = distance(a, b);
    if (len == 0.0) continue;
    const double heading = std::atan2(b.y - a.y, b.x - a.x);
    while (next_at < s + len) {
      const double t = (next_at - s) / len;
      line.arrows.push_back({a + (b - a) * t, heading});
      next_at += arrow_spacing;
    }
    s += len;
  }
  line.polyline = std::move(polyline);
  return line;
}

void validate_racing_line(const TrackModel& track, const RacingLine& line) {
  const TrackIndex index(track);
  for (std::size_t i = 0; i < line.polyline.size(); ++i) {
    const auto hit = index.query(line.polyline[i], track.half_width);
    if (!hit || hit->distance >= track.half_width) {
      throw InvalidArgument("racing line: point " + std::to_string(i) + " lies outside the track");
    }
  }
}

// ---- JSON ------------------------------------------------------------------

namespace {

Vec2 read_point(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ParseError(std::string("track file: ") + what + " must be [x, y] pairs", 0);
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

Polyline read_polyline(const json& j, const char* what) {
  if (!j.is_array()) throw ParseError(std::string("track file: ") + what + " must be an array", 0);
  Polyline p;
  p.reserve(j.size());
  for (const auto& e : j) p.push_back(read_point(e, what));
  return p;
}

json write_polyline(const Polyline& p) {
  json out = json::array();
  for (const Vec2& v : p) out.push_back({v.x, v.y});
  return out;
}

Segment read_segment(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ParseError("track file: start_line must be two points", 0);
  return {read_point(j[0], "start_line"), read_point(j[1], "start_line")};
}

void check_units(const json& doc) {
  if (!doc.contains("units")) return;
  if (doc["units"] != "meters") throw ParseError("track file: units must be \"meters\"", 0);
}

json parse_doc(const std::string& text) {
  try {
    json doc = json::parse(text);
    if (!doc.is_object()) throw ParseError("track file: top level must be an object", 0);
    return doc;
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("track file: ") + e.what(), 0);
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Segment default_start_line(const Polyline& line, double half_length) {
  const Vec2 a = line[0];
  Vec2 t = line[1] - a;
  t = t * (1.0 / norm(t));
  const Vec2 left = left_normal(t);
  return {a - left * half_length, a + left * half_length};
}

}  // namespace

TrackFile parse_track_json(const std::string& text) {
  const json doc = parse_doc(text);
  check_units(doc);
  for (const char* key : {"centerline", "half_width", "start_line", "racing_line"}) {
    if (!doc.contains(key)) throw ParseError(std::string("track file: missing \"") + key + "\"", 0);
  }
  TrackFile f;
  f.track.centerline = read_polyline(doc["centerline"], "centerline");
  if (!doc["half_width"].is_number()) throw ParseError("track file: half_width must be a number", 0);
  f.track.half_width = doc["half_width"].get<double>();
  f.track.start_line = read_segment(doc["start_line"]);
  const double spacing = doc.value("arrow_spacing", kDefaultArrowSpacing);
  f.track.validate();
  f.racing_line = make_racing_line(read_polyline(doc["racing_line"], "racing_line"), spacing);
  validate_racing_line(f.track, f.racing_line);
  return f;
}

std::string track_json(const TrackFile& file) {
  json doc;
  doc["units"] = "meters";
  doc["half_width"] = file.track.half_width;
  doc["start_line"] = {{file.track.start_line.a.x, file.track.start_line.a.y},
                       {file.track.start_line.b.x, file.track.start_line.b.y}};
  doc["arrow_spacing"] = file.racing_line.arrow_spacing;
  doc["centerline"] = write_polyline(file.track.centerline);
  doc["racing_line"] = write_polyline(file.racing_line.polyline);
  return doc.dump(1) + "\n";
}

TrackFile load_track_file(const std::filesystem::path& path) { return parse_track_json(read_file(path)); }

void save_track_file(const TrackFile& file, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << track_json(file);
  if (!out) throw IoError("write failed: " + path.string());
}

RacingLineFile load_racing_line(const std::filesystem::path& path) {
  const json doc = parse_doc(read_file(path));
  check_units(doc);
  if (!doc.contains("racing_line")) throw ParseError("racing line file: missing \"racing_line\"", 0);
  RacingLineFile f;
  f.line = make_racing_line(read_polyline(doc["racing_line"], "racing_line"),
                            doc.value("arrow_spacing", kDefaultArrowSpacing));
  const double hw = doc.value("half_width", 6.0);
  f.start_line = doc.contains("start_line") ? read_segment(doc["start_line"])
                                            : default_start_line(f.line.polyline, 2.5 * hw);
  return f;
}

// ---- spatial index ---------------------------------------------------------

TrackIndex::TrackIndex(const TrackModel& track, double cell) : cell_(cell) {
  const Polyline& c = track.centerline;
  if (c.size() < 2 || !(cell > 0.0)) throw InvalidArgument("track index: empty track");
  double max_x = c[0].x, max_y = c[0].y;
  min_x_ = c[0].x;
  min_y_ = c[0].y;
  for (const Vec2& p : c) {
    min_x_ = std::min(min_x_, p.x);
    min_y_ = std::min(min_y_, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  nx_ = static_cast<std::int64_t>((max_x - min_x_) / cell_) + 1;
  ny_ = static_cast<std::int64_t>((max_y - min_y_) / cell_) + 1;
  buckets_.resize(static_cast<std::size_t>(nx_ * ny_));
  for (std::size_t i = 1; i < c.size(); ++i) {
    const Segment s{c[i - 1], c[i]};
    segments_.push_back(s);
    const auto x0 = static_cast<std::int64_t>((std::min(s.a.x, s.b.x) - min_x_) / cell_);
    const auto x1 = static_cast<std::int64_t>((std::max(s.a.x, s.b.x) - min_x_) / cell_);
    const auto y0 = static_cast<std::int64_t>((std::min(s.a.y, s.b.y) - min_y_) / cell_);
    const auto y1 = static_cast<std::int64_t>((std::max(s.a.y, s.b.y) - min_y_) / cell_);
    for (auto y = y0; y <= y1; ++y) {
      for (auto x = x0; x <= x1; ++x) {
        buckets_[static_cast<std::size_t>(y * nx_ + x)].push_back(static_cast<std::uint32_t>(i - 1));
      }
    }
  }
}

std::optional<TrackIndex::Hit> TrackIndex::query(Vec2 p, double max_distance) const {
  const auto reach = static_cast<std::int64_t>(std::ceil(max_distance / cell_));
  const auto cx = static_cast<std::int64_t>(std::floor((p.x - min_x_) / cell_));
  const auto cy = static_cast<std::int64_t>(std::floor((p.y - min_y_) / cell_));
  std::optional<Hit> best;
  std::uint32_t best_seg = 0;
  double best_t = 0.0;
  for (auto y = std::max<std::int64_t>(cy - reach, 0); y <= std::min(cy + reach, ny_ - 1); ++y) {
    for (auto x = std::max<std::int64_t>(cx - reach, 0); x <= std::min(cx + reach, nx_ - 1); ++x) {
      for (const std::uint32_t k : buckets_[static_cast<std::size_t>(y * nx_ + x)]) {
        const ClosestPoint cp = closest_on_segment(p, segments_[k]);
        if (cp.distance <= max_distance && (!best || cp.distance < best->distance)) {
          best = Hit{cp.distance, 0.0};
          best_seg = k;
          best_t = cp.t;
        }
      }
    }
  }
  if (best) {
    const Segment& s = segments_[best_seg];
    const Vec2 d = s.b - s.a;
    const Vec2 foot = s.a + d * best_t;
    const double side = cross(d, p - foot);
    best->lateral = side >= 0.0 ? best->distance : -best->distance;
  }
  return best;
}

}  // namespace drive::sim
