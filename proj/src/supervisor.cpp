#include "uadrive/supervisor.hpp"

#include <cmath>

#include "uadrive/error.hpp"

namespace uadrive::supervisor {

std::string to_string(Authority a) { return a == Authority::Autonomous ? "autonomous" : "manual"; }

void SupervisorConfig::validate() const {
  if (!(cov_threshold > 0.0)) throw Error(ErrorCode::ConfigInvalid, "supervisor.cov_threshold must be positive");
  if (required_consecutive < 1) throw Error(ErrorCode::ConfigInvalid, "supervisor.consecutive must be at least 1");
}

bool is_beyond(double cov, const SupervisorConfig& cfg) { return !(std::abs(cov) <= cfg.cov_threshold); }

SupervisorState update(const SupervisorState& state, double cov, const SupervisorConfig& cfg) {
  SupervisorState next = state;
  const bool beyond = is_beyond(cov, cfg);
  if (state.mode == Authority::Autonomous) {
    next.beyond_count = beyond ? state.beyond_count + 1 : 0;
    if (next.beyond_count >= cfg.required_consecutive) {
      next.mode = Authority::Manual;
      next.intervention_count += 1;
      next.beyond_count = 0;
      next.within_count = 0;
    }
  } else {
    next.steps_in_manual += 1;
    next.within_count = beyond ? 0 : state.within_count + 1;
    if (next.within_count >= cfg.required_consecutive) {
      next.mode = Authority::Autonomous;
      next.beyond_count = 0;
      next.within_count = 0;
    }
  }
  return next;
}

}  // namespace uadrive::supervisor
