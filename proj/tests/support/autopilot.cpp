#include "autopilot.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "drive/evaluation.hpp"

namespace drive::test {

namespace {

// Offsets a closed polyline sideways (positive to the left of travel).
Polyline offset_path(const Polyline& line, double offset) {
  if (offset == 0.0) return line;
  Polyline out;
  const std::size_t n = line.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = line[i == 0 ? n - 2 : i - 1];
    const Vec2 b = line[i + 1 < n ? i + 1 : 1];
    const Vec2 t = b - a;
    out.push_back(line[i] + left_normal(t) * (offset / norm(t)));
  }
  return out;
}

}  // namespace

PurePursuit::PurePursuit(const Polyline& line, DriverProfile profile)
    : path_(offset_path(line, profile.lateral_offset)), profile_(profile) {
  if (path_.size() < 3) throw std::invalid_argument("pure pursuit needs a path");
  path_.pop_back();  // closed input: drop the duplicate end point
}

sim::ControlInput PurePursuit::operator()(const sim::VehicleState& s) {
  const std::size_t n = path_.size();
  const Vec2 pos{s.x, s.y};
  // Closest path vertex in a forward window from the last one.
  std::size_t best = cursor_;
  double best_d = distance(pos, path_[cursor_]);
  for (std::size_t k = 1; k < 40; ++k) {
    const std::size_t i = (cursor_ + k) % n;
    const double d = distance(pos, path_[i]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  cursor_ = best;
  std::size_t target = best;
  double walked = 0.0;
  while (walked < profile_.lookahead_m) {
    const std::size_t next = (target + 1) % n;
    walked += distance(path_[target], path_[next]);
    target = next;
  }
  const Vec2 to = path_[target] - pos;
  const double alpha = std::atan2(to.y, to.x) - s.heading;
  const double ld = norm(to);
  const double delta = std::atan2(2.0 * sim::kWheelbase * std::sin(alpha), ld);

  sim::ControlInput in;
  in.steer = std::clamp(delta / sim::kMaxSteerAngle, -1.0, 1.0);
  const double err = profile_.target_speed - s.speed;
  in.throttle = std::clamp(profile_.speed_gain * err, 0.0, 1.0);
  in.brake = std::clamp(-profile_.speed_gain * err, 0.0, 1.0);
  return in;
}

sim::Trajectory drive_laps(const sim::TrackModel& track, const sim::RacingLine& line, DriverProfile profile,
                           int laps, double max_seconds) {
  sim::SimSession session(sim::start_state(track));
  PurePursuit pilot(line.polyline, profile);
  const sim::TrackIndex index(track);
  const auto max_ticks = static_cast<std::uint64_t>(max_seconds * 1e9 / sim::kTickNs);
  const Vec2 d = track.start_line.b - track.start_line.a;
  auto side = [&](double x, double y) { return cross(d, Vec2{x, y} - track.start_line.a); };

  int crossings = 0;
  std::uint64_t tail = 0;
  sim::VehicleState s = session.state();
  double prev_side = side(s.x, s.y);
  for (std::uint64_t tick = 0; tick < max_ticks; ++tick) {
    session.set_control(pilot(s));
    s = session.step();
    const double now_side = side(s.x, s.y);
    if (prev_side > 0.0 && now_side <= 0.0 && distance(Vec2{s.x, s.y}, track.start_line.a) < 2.0 * norm(d)) {
      ++crossings;
    }
    prev_side = now_side;
    if (tick % 50 == 0 && !index.query({s.x, s.y}, track.half_width)) {
      throw std::runtime_error("autopilot left the track");
    }
    if (crossings >= laps && ++tail >= 100) return session.trajectory();
  }
  throw std::runtime_error("autopilot did not finish its laps in time");
}

}  // namespace drive::test
