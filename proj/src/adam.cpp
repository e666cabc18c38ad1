#include "uadrive/adam.hpp"

#include <cmath>

#include "uadrive/error.hpp"

namespace uadrive::nn {

void AdamState::step(std::span<double> params, std::span<const double> grad, const AdamConfig& cfg) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "optimizer state, parameters and gradient differ in length");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = cfg.beta1 * m_[i] + (1.0 - cfg.beta1) * grad[i];
    v_[i] = cfg.beta2 * v_[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
    const double m_hat = m_[i] / c1;
    const double v_hat = v_[i] / c2;
    params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

}  // namespace uadrive::nn
