#include "uadrive/vehicle.hpp"

#include <cmath>
#include <numbers>

#include "uadrive/error.hpp"
#include "uadrive/track.hpp"

namespace uadrive::vehicle {

double mph_to_mps(double mph) { return mph * 0.44704; }

void VehicleParams::validate() const {
  if (!(wheelbase > 0.0)) throw Error(ErrorCode::ConfigInvalid, "wheelbase must be positive");
  if (!(max_steer_angle > 0.0 && max_steer_angle < 0.5 * std::numbers::pi)) {
    throw Error(ErrorCode::ConfigInvalid, "max steer angle must lie in (0, pi/2)");
  }
  if (!(dt > 0.0)) throw Error(ErrorCode::ConfigInvalid, "dt must be positive");
  if (!(target_speed >= 0.0) || !std::isfinite(target_speed)) {
    throw Error(ErrorCode::ConfigInvalid, "target speed must be finite and non-negative");
  }
}

VehicleState step(const VehicleState& s, ControlCommand cmd, const VehicleParams& p) {
  const double wheel_angle = cmd.steer() * p.max_steer_angle;
  VehicleState next;
  next.x = s.x + s.speed * std::cos(s.heading) * p.dt;
  next.y = s.y + s.speed * std::sin(s.heading) * p.dt;
  next.heading = normalize_angle(s.heading + (s.speed / p.wheelbase) * std::tan(wheel_angle) * p.dt);
  next.speed = p.target_speed;
  return next;
}

}  // namespace uadrive::vehicle
