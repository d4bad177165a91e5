#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "drive/conditioning.hpp"
#include "drive/frame.hpp"
#include "drive/geometry.hpp"
#include "drive/pipeline/sources.hpp"

namespace drive::sim {

inline constexpr double kTrackLength = 3219.0;  // two miles
inline constexpr double kWheelbase = 2.7;
inline constexpr double kMaxSteerAngle = 0.5;
inline constexpr double kThrottleAccel = 3.0;
inline constexpr double kBrakeDecel = 6.0;
inline constexpr double kDrag = 0.05;
inline constexpr double kMaxSpeed = 13.89;  // 50 km/h
inline constexpr double kDefaultArrowSpacing = 10.0;
inline constexpr std::uint64_t kTickNs = 10'000'000;

// ---- track -----------------------------------------------------------------

struct TrackModel {
  Polyline centerline;  // closed: front() == back()
  double half_width = 6.0;
  // Driver's right end first; a crossing counts when motion has a positive
  // component along right-to-left rotated clockwise, i.e. the travel direction.
  Segment start_line;

  double length() const noexcept { return polyline_length(centerline); }
  Vec2 start_direction() const noexcept;
  void validate() const;
};

struct ArrowMarker {
  Vec2 position;
  double heading = 0.0;
};

struct RacingLine {
  Polyline polyline;
  std::vector<ArrowMarker> arrows;
  double arrow_spacing = kDefaultArrowSpacing;
};

// Stadium course: two straights joined by semicircles, driven counterclockwise,
// starting mid-way along the lower straight.
TrackModel make_stadium_track(double length = kTrackLength, double radius = 200.0,
                              double half_width = 6.0, double spacing = 5.0);

// Centerline shifted toward the inside of each bend (peak `apex_offset`
// meters at mid-bend, easing back to the centerline over `blend` meters).
Polyline racing_line_heuristic(const TrackModel& track, double apex_offset = 3.0, double blend = 60.0);
RacingLine make_racing_line(Polyline polyline, double arrow_spacing = kDefaultArrowSpacing);

// Largest distance of a racing-line point from the centerline must stay
// below half_width; throws otherwise.
void validate_racing_line(const TrackModel& track, const RacingLine& line);

struct TrackFile {
  TrackModel track;
  RacingLine racing_line;
};

// JSON: {"units": "meters", "half_width": w, "centerline": [[x,y],...],
//        "start_line": [[x,y],[x,y]], "racing_line": [[x,y],...], "arrow_spacing": s}
TrackFile load_track_file(const std::filesystem::path& path);
TrackFile parse_track_json(const std::string& text);
void save_track_file(const TrackFile& file, const std::filesystem::path& path);
std::string track_json(const TrackFile& file);

// Racing line plus start line; accepts a full track file too.
struct RacingLineFile {
  RacingLine line;
  Segment start_line;
};
RacingLineFile load_racing_line(const std::filesystem::path& path);

// Nearest-segment queries against the centerline, bucketed on a grid.
class TrackIndex {
 public:
  explicit TrackIndex(const TrackModel& track, double cell = 20.0);

  struct Hit {
    double distance = 0.0;  // unsigned distance to the centerline
    double lateral = 0.0;   // signed, positive to the left of travel
  };
  // nullopt when no centerline segment lies within `max_distance`.
  std::optional<Hit> query(Vec2 p, double max_distance) const;

 private:
  std::vector<Segment> segments_;
  double cell_;
  double min_x_ = 0.0;
  double min_y_ = 0.0;
  std::int64_t nx_ = 0;
  std::int64_t ny_ = 0;
  std::vector<std::vector<std::uint32_t>> buckets_;
};

// ---- vehicle ---------------------------------------------------------------

struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // radians, counterclockwise from +x
  double speed = 0.0;    // m/s
  std::uint64_t t_ns = 0;

  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

struct ControlInput {
  double steer = 0.0;     // [-1, 1], positive turns left
  double throttle = 0.0;  // [0, 1]
  double brake = 0.0;     // [0, 1]

  ControlInput clamped() const noexcept;
  friend bool operator==(const ControlInput&, const ControlInput&) = default;
};

/// Kinematic bicycle, forward Euler:
///   x' = v cos(th), y' = v sin(th), th' = v/L tan(delta),
///   v' = 3 throttle - 6 brake - 0.05 v,  v clamped to [0, 13.89].
/// Inputs are clamped to their ranges; dt must lie in (0, 0.1].
VehicleState step_vehicle(const VehicleState& state, const ControlInput& input, double dt);

// ---- camera ----------------------------------------------------------------

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct CameraIntrinsics {
  double fx = 500.0;
  double fy = 500.0;
  double cx = 320.0;
  double cy = 240.0;
  double height = 1.2;                   // meters above ground
  double pitch = -5.0 * 3.14159265358979323846 / 180.0;  // negative looks down

  // Defaults scaled to another resolution (same field of view).
  static CameraIntrinsics for_resolution(std::uint32_t width, std::uint32_t height);
  void validate(std::uint32_t width, std::uint32_t height) const;
};

// World frame: x, y on the ground, z up. Camera frame: x right, y down, z forward.
struct CameraPose {
  Vec3 position;
  Vec3 right;
  Vec3 down;
  Vec3 forward;

  static CameraPose from_vehicle(const VehicleState& state, const CameraIntrinsics& cam);
  Vec3 to_camera(const Vec3& world) const noexcept;
};

struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
};

// u = fx X/Z + cx, v = fy Y/Z + cy; nullopt when Z <= 0.01 m (behind camera).
// Pixel column i covers u in [i, i+1).
std::optional<PixelCoord> project_camera_point(const CameraIntrinsics& cam, const Vec3& p) noexcept;
std::optional<PixelCoord> project_point(const CameraIntrinsics& cam, const CameraPose& pose,
                                        const Vec3& world) noexcept;

// ---- rendering -------------------------------------------------------------

struct Palette {
  std::uint8_t sky[3] = {110, 160, 230};
  std::uint8_t grass[3] = {60, 130, 50};
  std::uint8_t asphalt[3] = {70, 70, 75};
  std::uint8_t marking[3] = {245, 245, 245};
  std::uint8_t arrow[3] = {240, 200, 30};
};

struct RenderOptions {
  Palette palette;
  double marking_width = 0.15;
  double marking_inset = 0.30;          // gap between marking and track edge
  double marking_max_distance = 60.0;   // markings beyond this are not drawn
  double far_distance = 400.0;          // ground beyond this renders as grass
};

struct RenderOutput {
  Frame frame;
  conditioning::GrayImage lane_mask;  // 255 where the pixel shows lane marking
};

/// Flat-shaded view from the driver seat, built by casting each pixel's ray
/// onto the ground plane: sky above the horizon, grass, asphalt, white lane
/// boundaries and yellow racing-line arrows (in that painter's order).
class Renderer {
 public:
  Renderer(TrackModel track, RacingLine line, CameraIntrinsics cam, std::uint32_t width = 640,
           std::uint32_t height = 480, RenderOptions options = {});

  RenderOutput render(const VehicleState& state) const;

  const TrackModel& track() const noexcept { return track_; }
  const RacingLine& racing_line() const noexcept { return line_; }
  const CameraIntrinsics& camera() const noexcept { return cam_; }
  const RenderOptions& options() const noexcept { return options_; }
  std::uint32_t width() const noexcept { return width_; }
  std::uint32_t height() const noexcept { return height_; }

  // Ground point seen through the center of pixel (i, j), if any.
  std::optional<Vec2> ground_hit(const CameraPose& pose, std::uint32_t i, std::uint32_t j) const;
  bool inside_arrow(Vec2 p) const;

 private:
  TrackModel track_;
  RacingLine line_;
  CameraIntrinsics cam_;
  std::uint32_t width_;
  std::uint32_t height_;
  RenderOptions options_;
  TrackIndex index_;
};

RenderOutput render_frame(const VehicleState& state, const TrackModel& track, const RacingLine& line,
                          const CameraIntrinsics& cam, std::uint32_t width = 640,
                          std::uint32_t height = 480);

struct RgbaImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> data;  // r, g, b, a

  static RgbaImage blank(std::uint32_t width, std::uint32_t height);
  std::uint8_t* at(std::uint32_t x, std::uint32_t y) noexcept {
    return data.data() + (std::size_t{y} * width + x) * 4;
  }
};

// out = round((overlay * a + base * (255 - a)) / 255) per channel.
Frame overlay_blend(const Frame& base, const RgbaImage& overlay);

// Racing-line arrows as seen from `state`, alpha `alpha` where an arrow is.
RgbaImage racing_line_overlay(const Renderer& renderer, const VehicleState& state,
                              std::uint8_t alpha = 200);

// ---- trajectories ----------------------------------------------------------

struct TrajectorySample {
  std::uint64_t t_ns = 0;
  double x = 0.0;
  double y = 0.0;
  double speed = 0.0;

  friend bool operator==(const TrajectorySample&, const TrajectorySample&) = default;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;

  Polyline positions() const;
  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

// CSV header `t_ns,x_m,y_m,speed_mps`, LF endings, shortest round-trip doubles.
void save_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);
std::string trajectory_csv(const Trajectory& traj);
Trajectory load_trajectory_csv(const std::filesystem::path& path);
Trajectory parse_trajectory_csv(const std::string& text);

// Timed control script: each input applies from its time until the next.
struct ControlScript {
  struct Entry {
    std::uint64_t t_ns = 0;
    ControlInput input;
  };
  std::vector<Entry> entries;

  // CSV `t_ms,steer,throttle,brake`.
  static ControlScript load(const std::filesystem::path& path);
  static ControlScript parse(const std::string& text);
  std::optional<ControlInput> at(std::uint64_t t_ns) const;
};

/// Deterministic 10 ms tick loop. Control inputs may be set from any thread;
/// the latest value is sampled once per tick. Each tick appends one sample.
class SimSession {
 public:
  explicit SimSession(VehicleState initial = {});

  void set_control(const ControlInput& input);
  ControlInput control() const;
  void set_script(ControlScript script);

  VehicleState step();
  void advance(std::uint64_t ticks);

  VehicleState state() const;
  Trajectory trajectory() const;
  std::uint64_t ticks() const;

 private:
  mutable std::mutex mu_;
  VehicleState state_;
  ControlInput control_;
  std::optional<ControlScript> script_;
  Trajectory trajectory_;
  std::uint64_t ticks_ = 0;
  std::uint64_t trajectory_start_ = 0;
};

// Vehicle placed `ahead` meters past the start line, heading along the track.
// Starting past the line makes the first crossing the end of the first lap.
VehicleState start_state(const TrackModel& track, double ahead = 1.0);

/// Frame source rendering a SimSession. Each frame advances the simulation by
/// round(100 / fps) ticks. With `paced` the source also sleeps to real time.
class SimSource final : public pipeline::FrameSource {
 public:
  SimSource(std::shared_ptr<SimSession> session, std::shared_ptr<const Renderer> renderer,
            double fps, bool paced, std::uint64_t max_frames = 0);

  void pace() override;
  std::optional<Frame> next() override;

 private:
  std::shared_ptr<SimSession> session_;
  std::shared_ptr<const Renderer> renderer_;
  std::uint64_t ticks_per_frame_;
  std::uint64_t max_frames_;
  std::uint64_t produced_ = 0;
  pipeline::Pacer pacer_;
};

}  // namespace drive::sim
