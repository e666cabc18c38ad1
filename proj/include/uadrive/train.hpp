#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "uadrive/adam.hpp"
#include "uadrive/dataset.hpp"
#include "uadrive/mlp.hpp"

namespace uadrive::nn {

struct TrainHyper {
  int max_epochs = 500;
  int batch_size = 64;
  AdamConfig adam;
  int patience = 20;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Tracks the best validation value and signals when `patience` epochs have
/// passed without improvement.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {}

  /// Returns true when `value` is a new best (strict improvement).
  bool observe(int epoch, double value);
  bool should_stop() const { return since_best_ >= patience_; }
  int best_epoch() const { return best_epoch_; }
  double best_value() const { return best_; }

 private:
  int patience_;
  int since_best_ = 0;
  int best_epoch_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
};

/// One row of training history. For the deterministic network `train` is the
/// epoch-average MSE and `val` the validation MSE; for the Bayesian network
/// `train` is the summed minibatch ELBO and `val` the mean-prediction MSE.
struct EpochRecord {
  int epoch = 0;
  double train = 0.0;
  double val = 0.0;
};

struct DnnTrainResult {
  WeightVector weights;
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_val = 0.0;
};

/// Minibatch MSE descent with early stopping on validation MSE; returns the
/// best-validation snapshot. Throws Error(Diverged) on a non-finite loss.
DnnTrainResult train_dnn(const dataset::Dataset& train, const dataset::Dataset& val,
                         const MlpArchitecture& arch, const TrainHyper& hyper);

}  // namespace uadrive::nn
