#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "drive/error.hpp"
#include "drive/simworld.hpp"

namespace drive::sim {

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, r.ptr);
}

template <typename T>
T parse_field(std::string_view s, std::size_t line, const char* what) {
  T v{};
  const char* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  if (r.ec != std::errc{} || r.ptr != end) {
    throw ParseError(std::string("bad ") + what + " value '" + std::string(s) + "'", line);
  }
  return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Yields (line number, content) for each non-empty line, CR stripped.
template <typename Fn>
void for_each_line(const std::string& text, Fn&& fn) {
  std::size_t pos = 0;
  std::size_t lineno = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string_view line(text.data() + pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++lineno;
    if (!line.empty()) fn(lineno, line);
    pos = nl + 1;
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Polyline Trajectory::positions() const {
  Polyline p;
  p.reserve(samples.size());
  for (const auto& s : samples) p.push_back({s.x, s.y});
  return p;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "t_ns,x_m,y_m,speed_mps\n";
  out.reserve(out.size() + traj.samples.size() * 64);
  for (const auto& s : traj.samples) {
    out += std::to_string(s.t_ns);
    out += ',';
    append_double(out, s.x);
    out += ',';
    append_double(out, s.y);
    out += ',';
    append_double(out, s.speed);
    out += '\n';
  }
  return out;
}

void save_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << trajectory_csv(traj);
  if (!out) throw IoError("write failed: " + path.string());
}

Trajectory parse_trajectory_csv(const std::string& text) {
  Trajectory traj;
  bool header = false;
  for_each_line(text, [&](std::size_t lineno, std::string_view line) {
    if (!header) {
      if (line != "t_ns,x_m,y_m,speed_mps") throw ParseError("trajectory: unexpected header", lineno);
      header = true;
      return;
    }
    const auto f = split_csv(line);
    if (f.size() != 4) throw ParseError("trajectory: expected 4 fields", lineno);
    TrajectorySample s;
    s.t_ns = parse_field<std::uint64_t>(f[0], lineno, "t_ns");
    s.x = parse_field<double>(f[1], lineno, "x_m");
    s.y = parse_field<double>(f[2], lineno, "y_m");
    s.speed = parse_field<double>(f[3], lineno, "speed_mps");
    if (!traj.samples.empty() && s.t_ns <= traj.samples.back().t_ns) {
      throw ParseError("trajectory: timestamps must increase", lineno);
    }
    traj.samples.push_back(s);
  });
  if (!header) throw ParseError("trajectory: missing header", 0);
  return traj;
}

Trajectory load_trajectory_csv(const std::filesystem::path& path) {
  try {
    return parse_trajectory_csv(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

// ---- control script --------------------------------------------------------

ControlScript ControlScript::parse(const std::string& text) {
  ControlScript script;
  for_each_line(text, [&](std::size_t lineno, std::string_view line) {
    if (line.front() == '#' || line.starts_with("t_ms")) return;
    const auto f = split_csv(line);
    if (f.size() != 4) throw ParseError("control script: expected t_ms,steer,throttle,brake", lineno);
    Entry e;
    e.t_ns = parse_field<std::uint64_t>(f[0], lineno, "t_ms") * 1'000'000ull;
    e.input = {parse_field<double>(f[1], lineno, "steer"), parse_field<double>(f[2], lineno, "throttle"),
               parse_field<double>(f[3], lineno, "brake")};
    if (!script.entries.empty() && e.t_ns < script.entries.back().t_ns) {
      throw ParseError("control script: times must not decrease", lineno);
    }
    script.entries.push_back(e);
  });
  return script;
}

ControlScript ControlScript::load(const std::filesystem::path& path) { return parse(read_file(path)); }

std::optional<ControlInput> ControlScript::at(std::uint64_t t_ns) const {
  auto it = std::upper_bound(entries.begin(), entries.end(), t_ns,
                             [](std::uint64_t t, const Entry& e) { return t < e.t_ns; });
  if (it == entries.begin()) return std::nullopt;
  return std::prev(it)->input;
}

// ---- session ---------------------------------------------------------------

SimSession::SimSession(VehicleState initial) : state_(initial), trajectory_start_(initial.t_ns) {}

void SimSession::set_control(const ControlInput& input) {
  std::lock_guard lock(mu_);
  control_ = input;
}

ControlInput SimSession::control() const {
  std::lock_guard lock(mu_);
  return control_;
}

void SimSession::set_script(ControlScript script) {
  std::lock_guard lock(mu_);
  script_ = std::move(script);
}

VehicleState SimSession::step() {
  std::lock_guard lock(mu_);
  if (script_) {
    if (auto u = script_->at(state_.t_ns)) control_ = *u;
  }
  state_ = step_vehicle(state_, control_, double(kTickNs) * 1e-9);
  // Keep time exact in integer nanoseconds regardless of dt rounding.
  state_.t_ns = (ticks_ + 1) * kTickNs + trajectory_start_;
  ++ticks_;
  trajectory_.samples.push_back({state_.t_ns, state_.x, state_.y, state_.speed});
  return state_;
}

void SimSession::advance(std::uint64_t ticks) {
  for (std::uint64_t i = 0; i < ticks; ++i) step();
}

VehicleState SimSession::state() const {
  std::lock_guard lock(mu_);
  return state_;
}

Trajectory SimSession::trajectory() const {
  std::lock_guard lock(mu_);
  return trajectory_;
}

std::uint64_t SimSession::ticks() const {
  std::lock_guard lock(mu_);
  return ticks_;
}

VehicleState start_state(const TrackModel& track, double ahead) {
  const Vec2 mid = (track.start_line.a + track.start_line.b) * 0.5;
  Vec2 dir = track.start_direction();
  dir = dir * (1.0 / norm(dir));
  VehicleState s;
  s.x = mid.x + dir.x * ahead;
  s.y = mid.y + dir.y * ahead;
  s.heading = std::atan2(dir.y, dir.x);
  return s;
}

// ---- frame source ----------------------------------------------------------

SimSource::SimSource(std::shared_ptr<SimSession> session, std::shared_ptr<const Renderer> renderer,
                     double fps, bool paced, std::uint64_t max_frames)
    : session_(std::move(session)),
      renderer_(std::move(renderer)),
      ticks_per_frame_(0),
      max_frames_(max_frames),
      pacer_(paced ? fps : 0.0) {
  if (!(fps > 0.0)) throw InvalidArgument("sim source: fps must be positive");
  ticks_per_frame_ = static_cast<std::uint64_t>(std::max(1.0, std::round(1e9 / fps / double(kTickNs))));
}

void SimSource::pace() {
  if (max_frames_ == 0 || produced_ < max_frames_) pacer_.wait();
}

std::optional<Frame> SimSource::next() {
  if (max_frames_ != 0 && produced_ >= max_frames_) return std::nullopt;
  session_->advance(ticks_per_frame_);
  RenderOutput r = renderer_->render(session_->state());
  ++produced_;
  r.frame.id = produced_;
  return std::move(r.frame);
}

}  // namespace drive::sim
