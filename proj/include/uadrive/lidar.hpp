#pragma once

#include <vector>

#include "uadrive/track.hpp"
#include "uadrive/vehicle.hpp"

namespace uadrive::lidar {

struct LidarConfig {
  int n_rays = 19;
  double fov = 3.14159265358979323846;  // symmetric about the heading
  double max_range = 100.0;

  void validate() const;
  /// Beam angle relative to the heading; beam 0 is the rightmost.
  double relative_angle(int i) const;
};

/// Distances ordered right to left, plus the same values divided by max_range.
struct LidarScan {
  std::vector<double> distances;
  std::vector<double> normalized;
};

/// Throws Error(OriginOutsideTrack) when the vehicle is off the corridor.
LidarScan scan(const track::Track& track, const vehicle::VehicleState& state, const LidarConfig& config);

}  // namespace uadrive::lidar
