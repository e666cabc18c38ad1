#include "uadrive/pid.hpp"

#include <algorithm>
#include <cmath>

#include "uadrive/error.hpp"

namespace uadrive::pid {

void PidGains::validate() const {
  if (!(integral_limit > 0.0)) throw Error(ErrorCode::ConfigInvalid, "pid.integral_limit must be positive");
  for (const double g : {kp, ki, kd, k_heading}) {
    if (!std::isfinite(g)) throw Error(ErrorCode::ConfigInvalid, "pid gains must be finite");
  }
}

PidOutput pid_law(const PidGains& gains, const PidState& state, double offset, double heading_error,
                  double dt) {
  const double error = -offset - gains.k_heading * heading_error;
  PidState next;
  next.integral = std::clamp(state.integral + error * dt, -gains.integral_limit, gains.integral_limit);
  next.prev_error = error;
  const double derivative = (error - state.prev_error) / dt;
  const double u = gains.kp * error + gains.ki * next.integral + gains.kd * derivative;
  return {vehicle::ControlCommand(u), next};
}

PidOutput pid_steer(const PidGains& gains, const PidState& state, const track::Projection& where,
                    const vehicle::VehicleState& vehicle, double dt) {
  const double heading_error = normalize_angle(vehicle.heading - where.tangent_heading);
  return pid_law(gains, state, where.offset, heading_error, dt);
}

PidOutput pid_steer(const PidGains& gains, const PidState& state, const track::Track& track,
                    const vehicle::VehicleState& vehicle, double dt) {
  const auto where = track.project({vehicle.x, vehicle.y});
  if (std::abs(where.offset) > 0.5 * track.width()) {
    throw Error(ErrorCode::OriginOutsideTrack, "vehicle is outside track '" + track.name() + "'");
  }
  return pid_steer(gains, state, where, vehicle, dt);
}

}  // namespace uadrive::pid
