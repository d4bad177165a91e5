#include <algorithm>
#include <cmath>

#include "drive/error.hpp"
#include "drive/simworld.hpp"

namespace drive::sim {

ControlInput ControlInput::clamped() const noexcept {
  auto clamp = [](double v, double lo, double hi) {
    if (std::isnan(v)) return 0.0;
    return std::clamp(v, lo, hi);
  };
  return {clamp(steer, -1.0, 1.0), clamp(throttle, 0.0, 1.0), clamp(brake, 0.0, 1.0)};
}

VehicleState step_vehicle(const VehicleState& s, const ControlInput& input, double dt) {
  if (!(dt > 0.0) || dt > 0.1) throw InvalidArgument("step_vehicle: dt must lie in (0, 0.1]");
  const ControlInput u = input.clamped();
  const double delta = u.steer * kMaxSteerAngle;
  VehicleState n = s;
  n.x = s.x + s.speed * std::cos(s.heading) * dt;
  n.y = s.y + s.speed * std::sin(s.heading) * dt;
  n.heading = s.heading + s.speed / kWheelbase * std::tan(delta) * dt;
  const double accel = kThrottleAccel * u.throttle - kBrakeDecel * u.brake - kDrag * s.speed;
  n.speed = std::clamp(s.speed + accel * dt, 0.0, kMaxSpeed);
  n.t_ns = s.t_ns + static_cast<std::uint64_t>(std::llround(dt * 1e9));
  return n;
}

// ---- camera ----------------------------------------------------------------

CameraIntrinsics CameraIntrinsics::for_resolution(std::uint32_t width, std::uint32_t height) {
  CameraIntrinsics c;
  const double scale = double(width) / 640.0;
  c.fx = 500.0 * scale;
  c.fy = 500.0 * scale;
  c.cx = double(width) / 2.0;
  c.cy = double(height) / 2.0;
  return c;
}

void CameraIntrinsics::validate(std::uint32_t width, std::uint32_t height) const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw InvalidArgument("camera: focal lengths must be positive");
  if (!(height > 0.0)) throw InvalidArgument("camera: mounting height must be positive");
  if (width == 0 || height == 0) throw InvalidArgument("camera: empty image");
}

CameraPose CameraPose::from_vehicle(const VehicleState& state, const CameraIntrinsics& cam) {
  const double ch = std::cos(state.heading), sh = std::sin(state.heading);
  const double cp = std::cos(cam.pitch), sp = std::sin(cam.pitch);
  CameraPose p;
  p.position = {state.x, state.y, cam.height};
  p.forward = {ch * cp, sh * cp, sp};
  p.right = {sh, -ch, 0.0};
  // down = forward x right
  p.down = {p.forward.y * p.right.z - p.forward.z * p.right.y,
            p.forward.z * p.right.x - p.forward.x * p.right.z,
            p.forward.x * p.right.y - p.forward.y * p.right.x};
  return p;
}

Vec3 CameraPose::to_camera(const Vec3& w) const noexcept {
  const Vec3 d{w.x - position.x, w.y - position.y, w.z - position.z};
  auto dot3 = [](const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; };
  return {dot3(d, right), dot3(d, down), dot3(d, forward)};
}

std::optional<PixelCoord> project_camera_point(const CameraIntrinsics& cam, const Vec3& p) noexcept {
  if (!(p.z > 0.01)) return std::nullopt;
  return PixelCoord{cam.fx * p.x / p.z + cam.cx, cam.fy * p.y / p.z + cam.cy};
}

std::optional<PixelCoord> project_point(const CameraIntrinsics& cam, const CameraPose& pose,
                                        const Vec3& world) noexcept {
  return project_camera_point(cam, pose.to_camera(world));
}

}  // namespace drive::sim
