#include <cmath>

#include "uadrive/error.hpp"
#include "uadrive/train.hpp"

namespace uadrive::nn {

void TrainHyper::validate() const {
  if (max_epochs < 1 || batch_size < 1 || patience < 1 || !(adam.learning_rate > 0.0) ||
      !(adam.beta1 > 0.0 && adam.beta1 < 1.0) || !(adam.beta2 > 0.0 && adam.beta2 < 1.0) ||
      !(adam.epsilon > 0.0)) {
    throw Error(ErrorCode::ConfigInvalid, "training hyperparameters must be positive (betas in (0, 1))");
  }
  if (patience >= max_epochs) throw Error(ErrorCode::ConfigInvalid, "train.patience must be below train.max_epochs");
}

bool EarlyStopping::observe(int epoch, double value) {
  if (value < best_) {
    best_ = value;
    best_epoch_ = epoch;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

DnnTrainResult train_dnn(const dataset::Dataset& train, const dataset::Dataset& val,
                         const MlpArchitecture& arch, const TrainHyper& hyper) {
  hyper.validate();
  arch.validate();
  if (train.empty() || val.empty()) throw Error(ErrorCode::EmptySplit, "training needs non-empty train and val sets");

  const Batch all_train = Batch::from_samples(train.samples);
  const Batch all_val = Batch::from_samples(val.samples);
  if (all_train.x.rows() != all_val.x.rows() || static_cast<std::size_t>(all_train.x.rows()) != arch.input_size()) {
    throw Error(ErrorCode::DimensionMismatch, "dataset feature width does not match the network input");
  }

  MlpWorkspace ws(arch);
  WeightVector w = init_weights(arch, hyper.seed);
  AdamState opt(w.size());
  EarlyStopping stopper(hyper.patience);

  DnnTrainResult result;
  result.weights = w;
  for (int epoch = 1; epoch <= hyper.max_epochs; ++epoch) {
    double loss_sum = 0.0;
    const auto plan = dataset::batches(train.size(), static_cast<std::size_t>(hyper.batch_size), hyper.seed,
                                       static_cast<std::uint64_t>(epoch));
    for (const auto& idx : plan) {
      const Batch b = Batch::gather(all_train, idx);
      const auto lg = loss_grad(ws, w, b);
      if (!std::isfinite(lg.loss)) {
        throw Error(ErrorCode::Diverged, "training loss became non-finite at epoch " + std::to_string(epoch));
      }
      loss_sum += lg.loss * static_cast<double>(b.size());
      opt.step(w, lg.grad, hyper.adam);
    }
    const double val_loss = mse(ws, w, all_val);
    if (!std::isfinite(val_loss)) {
      throw Error(ErrorCode::Diverged, "validation loss became non-finite at epoch " + std::to_string(epoch));
    }
    result.history.push_back({epoch, loss_sum / static_cast<double>(train.size()), val_loss});
    if (stopper.observe(epoch, val_loss)) result.weights = w;
    if (stopper.should_stop()) break;
  }
  result.best_epoch = stopper.best_epoch();
  result.best_val = stopper.best_value();
  return result;
}

}  // namespace uadrive::nn
