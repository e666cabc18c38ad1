#include "uadrive/lidar.hpp"

#include <cmath>
#include <numbers>

#include "uadrive/error.hpp"

namespace uadrive::lidar {

void LidarConfig::validate() const {
  if (n_rays < 2) throw Error(ErrorCode::ConfigInvalid, "n_rays must be at least 2");
  if (!(fov > 0.0 && fov <= 2.0 * std::numbers::pi)) {
    throw Error(ErrorCode::ConfigInvalid, "fov must lie in (0, 2*pi]");
  }
  if (!(max_range > 0.0)) throw Error(ErrorCode::ConfigInvalid, "max_range must be positive");
}

double LidarConfig::relative_angle(int i) const {
  return -0.5 * fov + i * fov / (n_rays - 1);
}

LidarScan scan(const track::Track& track, const vehicle::VehicleState& state, const LidarConfig& config) {
  const Vec2 origin{state.x, state.y};
  if (!track.contains(origin)) {
    throw Error(ErrorCode::OriginOutsideTrack, "vehicle is outside track '" + track.name() + "'");
  }
  LidarScan out;
  out.distances.resize(config.n_rays);
  out.normalized.resize(config.n_rays);
  for (int i = 0; i < config.n_rays; ++i) {
    const Vec2 dir = unit_from_angle(state.heading + config.relative_angle(i));
    const double d = track.ray_cast_inside(origin, dir, config.max_range);
    out.distances[i] = d;
    out.normalized[i] = d / config.max_range;
  }
  return out;
}

}  // namespace uadrive::lidar
