#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace uadrive::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moment accumulators with bias correction. Moves parameters
/// against the supplied gradient (descent on a loss).
class AdamState {
 public:
  explicit AdamState(std::size_t n) : m_(n, 0.0), v_(n, 0.0) {}

  void step(std::span<double> params, std::span<const double> grad, const AdamConfig& cfg);

  long steps_taken() const { return t_; }
  std::span<const double> first_moment() const { return m_; }
  std::span<const double> second_moment() const { return v_; }

 private:
  std::vector<double> m_;
  std::vector<double> v_;
  long t_ = 0;
};

}  // namespace uadrive::nn
