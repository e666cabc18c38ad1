#pragma once

#include "uadrive/track.hpp"
#include "uadrive/vehicle.hpp"

namespace uadrive::pid {

struct PidGains {
  double kp = 0.30;
  double ki = 0.01;
  double kd = 0.08;
  double k_heading = 2.0;
  double integral_limit = 5.0;

  void validate() const;
};

struct PidState {
  double integral = 0.0;
  double prev_error = 0.0;

  friend bool operator==(const PidState&, const PidState&) = default;
};

struct PidOutput {
  vehicle::ControlCommand cmd;
  PidState state;
};

/// The control law on an already-measured lateral offset and heading error.
/// Positive offset (left of centre) produces a rightward (negative) command.
PidOutput pid_law(const PidGains& gains, const PidState& state, double offset, double heading_error,
                  double dt);

/// Lateral-offset PID steering against the track centerline.
/// Throws Error(OriginOutsideTrack) when the vehicle is off the corridor.
PidOutput pid_steer(const PidGains& gains, const PidState& state, const track::Track& track,
                    const vehicle::VehicleState& vehicle, double dt);

/// Same as pid_steer with a projection the caller already computed.
PidOutput pid_steer(const PidGains& gains, const PidState& state, const track::Projection& where,
                    const vehicle::VehicleState& vehicle, double dt);

inline PidState reset(const PidState&) { return PidState{}; }

}  // namespace uadrive::pid
