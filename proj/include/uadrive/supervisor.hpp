#pragma once

#include <string>

// Control-authority state machine gated on the predictive CoV.
namespace uadrive::supervisor {

enum class Authority { Autonomous, Manual };

std::string to_string(Authority a);

struct SupervisorConfig {
  double cov_threshold = 100.0;  // percent: beyond means std exceeds the floored |mean|
  int required_consecutive = 50;

  void validate() const;
};

struct SupervisorState {
  Authority mode = Authority::Autonomous;
  int beyond_count = 0;
  int within_count = 0;
  int intervention_count = 0;
  long steps_in_manual = 0;

  friend bool operator==(const SupervisorState&, const SupervisorState&) = default;
};

/// |cov| > threshold is "beyond", |cov| <= threshold is "within". A NaN CoV
/// counts as beyond.
bool is_beyond(double cov, const SupervisorConfig& cfg);

/// One step of the FSM. Pure.
SupervisorState update(const SupervisorState& state, double cov, const SupervisorConfig& cfg);

inline Authority authority(const SupervisorState& state) { return state.mode; }

}  // namespace uadrive::supervisor
