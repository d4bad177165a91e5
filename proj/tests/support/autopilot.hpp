#pragma once

#include <cstddef>
#include <cstdint>

#include "drive/simworld.hpp"

namespace drive::test {

// Scripted stand-in for a participant: pure pursuit on the racing line,
// shifted sideways by `lateral_offset` metres, with a proportional speed
// controller.
struct DriverProfile {
  double lookahead_m = 8.0;
  double target_speed = 12.0;  // m/s
  double lateral_offset = 0.0;
  double speed_gain = 0.8;
};

class PurePursuit {
 public:
  PurePursuit(const Polyline& line, DriverProfile profile);
  sim::ControlInput operator()(const sim::VehicleState& s);

 private:
  Polyline path_;
  DriverProfile profile_;
  std::size_t cursor_ = 0;
};

// Drives from the start state until `laps` start-line crossings have
// happened, then a further second. Throws if the car leaves the track or the
// laps take longer than `max_seconds`.
sim::Trajectory drive_laps(const sim::TrackModel& track, const sim::RacingLine& line, DriverProfile profile,
                           int laps = 2, double max_seconds = 1200.0);

}  // namespace drive::test
