#pragma once

#include <algorithm>

namespace uadrive::vehicle {

struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // (-pi, pi]
  double speed = 0.0;    // m/s
};

double mph_to_mps(double mph);

struct VehicleParams {
  double wheelbase = 2.6;
  double max_steer_angle = 0.37;  // rad, wheel angle at |steer| = 1
  double dt = 0.002;
  double target_speed = 26.8224;  // 60 mph

  /// Throws Error(ConfigInvalid) on a violated invariant.
  void validate() const;
};

/// Normalized steering command, clamped to [-1, 1]; positive steers left.
class ControlCommand {
 public:
  constexpr ControlCommand() = default;
  constexpr explicit ControlCommand(double steer) : steer_(std::clamp(steer, -1.0, 1.0)) {}
  constexpr double steer() const { return steer_; }

 private:
  double steer_ = 0.0;
};

/// One explicit Euler step of the kinematic bicycle at constant target speed.
VehicleState step(const VehicleState& state, ControlCommand cmd, const VehicleParams& params);

}  // namespace uadrive::vehicle
