#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "uadrive/dataset.hpp"

namespace uadrive::nn {

/// Fully connected ReLU network with a single linear output.
struct MlpArchitecture {
  std::vector<int> layer_sizes;

  /// [n_inputs, 256, 128, 64, 32, 16, 1]
  static MlpArchitecture steering(int n_inputs = 19);
  /// Parses "19,256,128,64,32,16,1".
  static MlpArchitecture parse(const std::string& text);

  void validate() const;
  std::size_t layer_count() const { return layer_sizes.size() - 1; }
  std::size_t input_size() const { return static_cast<std::size_t>(layer_sizes.front()); }
  std::size_t parameter_count() const;
  /// Offset of layer l's weight block (row-major, out x in); its biases follow.
  std::size_t weight_offset(std::size_t layer) const;
  std::string to_string() const;

  friend bool operator==(const MlpArchitecture&, const MlpArchitecture&) = default;
};

/// Flat parameters in layer-major order: W_1, b_1, W_2, b_2, ...
using WeightVector = std::vector<double>;

/// He-scaled Gaussian weights (std sqrt(2 / fan_in)), zero biases.
WeightVector init_weights(const MlpArchitecture& arch, std::uint64_t seed);

/// Standard deviation used by init_weights for every parameter of a layer.
double he_scale(const MlpArchitecture& arch, std::size_t layer);

/// Throws Error(DimensionMismatch) on wrong input or weight length.
double forward(const MlpArchitecture& arch, std::span<const double> w, std::span<const double> input);

/// Dense mini-batch: one column per sample.
struct Batch {
  Eigen::MatrixXd x;
  Eigen::RowVectorXd y;

  std::size_t size() const { return static_cast<std::size_t>(x.cols()); }

  static Batch from_samples(std::span<const dataset::Sample> samples);
  static Batch gather(const Batch& all, std::span<const std::size_t> columns);
};

/// Reusable activation storage for batched forward and reverse passes.
class MlpWorkspace {
 public:
  explicit MlpWorkspace(MlpArchitecture arch);

  const MlpArchitecture& arch() const { return arch_; }

  /// Runs the network on every column of x; the returned row holds the outputs.
  const Eigen::RowVectorXd& forward(std::span<const double> w, const Eigen::MatrixXd& x);

  /// Given d(objective)/d(output) for the batch of the last forward(), adds
  /// d(objective)/d(w) into grad. ReLU contributes a zero derivative at 0.
  void backward(std::span<const double> w, const Eigen::RowVectorXd& d_output, std::span<double> grad);

 private:
  MlpArchitecture arch_;
  std::vector<Eigen::MatrixXd> pre_;   // z_l
  std::vector<Eigen::MatrixXd> post_;  // a_l, post_[0] is the input
  Eigen::RowVectorXd out_;
  Eigen::MatrixXd delta_, delta_prev_;
  // Products run on these owned, aligned copies: Eigen's kernels round
  // differently depending on the alignment of mapped memory.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> layer_, layer_grad_;
};

struct LossGrad {
  double loss = 0.0;
  WeightVector grad;
};

/// Mean squared error over the batch and its exact gradient.
LossGrad loss_grad(const MlpArchitecture& arch, std::span<const double> w,
                   std::span<const dataset::Sample> batch);
LossGrad loss_grad(MlpWorkspace& ws, std::span<const double> w, const Batch& batch);

/// Mean squared error only.
double mse(MlpWorkspace& ws, std::span<const double> w, const Batch& batch);

}  // namespace uadrive::nn
