#pragma once

// Straightforward reference implementations. Each one is written from the
// documented rule with the simplest possible algorithm so it can be compared
// against the optimized library code.

#include <cstdint>
#include <string>
#include <vector>

#include "drive/conditioning.hpp"
#include "drive/frame.hpp"
#include "drive/geometry.hpp"

namespace drive::test::oracle {

using conditioning::GrayImage;

GrayImage grayscale(const Frame& rgb);
// Direct 2-D convolution with the outer-product Gaussian, clamp-to-edge.
GrayImage blur(const GrayImage& img, double sigma);
// Full Canny: gradient orientation from atan2, suppression by comparing
// squared magnitudes, hysteresis by iterating to a fixpoint.
GrayImage canny(const Frame& rgb, double low, double high, double sigma);

// Minimum over every monotone coupling of the maximum pair distance.
double frechet_exhaustive(const Polyline& p, const Polyline& q);
// Full (n x m) table, filled column by column.
double frechet_table(const Polyline& p, const Polyline& q);

// Arc-length resampling by bisection on the cumulative length.
Polyline resample(const Polyline& p, std::size_t n);
// Sum of shoelace areas of the quads between two resampled curves.
double area(const Polyline& p, const Polyline& q, std::size_t n);

struct SessionOracle {
  double frechet_m = 0.0;
  double area_m2 = 0.0;
  double speed_mean_kmh = 0.0;
  double speed_std_kmh = 0.0;
};

struct RawSample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double speed = 0.0;
};

std::vector<RawSample> parse_trajectory(const std::string& csv_text);
// Lap splitting with a segment/segment intersection test plus a direction
// check; the second lap is scored.
SessionOracle evaluate(const std::vector<RawSample>& samples, const Polyline& racing_line,
                       Vec2 line_a, Vec2 line_b, std::size_t area_samples);

}  // namespace drive::test::oracle
