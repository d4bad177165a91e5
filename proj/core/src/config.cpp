#include "drive/config.hpp"

#include "drive/error.hpp"

namespace drive {

void PipelineConfig::validate() const {
  if (width < 64 || height < 64 || width % 2 || height % 2) {
    throw InvalidArgument("resolution must be even and at least 64x64, got " +
                          std::to_string(width) + "x" + std::to_string(height));
  }
  if (width > 65535 || height > 65535) throw InvalidArgument("resolution exceeds 16-bit range");
  if (!(target_fps > 0.0)) throw InvalidArgument("target_fps must be positive");
  if (!(canny_low >= 0.0 && canny_low <= canny_high && canny_high <= 255.0)) {
    throw InvalidArgument("canny thresholds must satisfy 0 <= low <= high <= 255");
  }
  if (canny_low > 0.0 && canny_high > 0.0 && !(canny_low < canny_high)) {
    throw InvalidArgument("canny low threshold must be strictly below high");
  }
  if (!(canny_sigma > 0.0)) throw InvalidArgument("canny sigma must be positive");
}

}  // namespace drive
