#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "uadrive/dataset.hpp"
#include "uadrive/mlp.hpp"
#include "uadrive/train.hpp"

// Mean-field Gaussian posterior over the MLP weight vector, trained by
// maximizing the evidence lower bound with reparameterized gradients.
namespace uadrive::bnn {

double softplus(double x);
double inverse_softplus(double y);
double sigmoid(double x);

/// q(W) = prod_i N(mu_i, softplus(rho_i)^2)
struct VariationalParams {
  nn::WeightVector mu;
  std::vector<double> rho;

  std::size_t size() const { return mu.size(); }
  std::vector<double> sigma() const;
};

struct PriorSpec {
  double sigma = 1.0;
};

struct LikelihoodSpec {
  double noise_sigma = 0.005;
};

struct BnnHyper {
  nn::TrainHyper train;
  int mc_samples = 2;     // L, weight draws per gradient step
  int pred_samples = 30;  // N, draws for predictive statistics
  /// Initial posterior std as a fraction of each layer's He scale.
  double init_sigma_ratio = 0.05;

  void validate() const;
};

/// W_i = mu_i + sigma_i * noise_i. Throws Error(DimensionMismatch).
nn::WeightVector sample_weights(const VariationalParams& vp, std::span<const double> noise);

/// Closed-form KL(q || N(0, sigma_p^2 I)).
double kl_to_prior(const VariationalParams& vp, const PriorSpec& prior);

/// L standard-normal vectors of length vp.size(), drawn from one stream key.
std::vector<std::vector<double>> draw_noise(std::size_t dim, int count, std::uint64_t key);

/// (1/L) sum_l sum_batch log N(label | f(x; W_l), sigma_n^2) - kl_scale * KL.
double elbo(const nn::MlpArchitecture& arch, const VariationalParams& vp, std::span<const dataset::Sample> batch,
            const PriorSpec& prior, const LikelihoodSpec& like, std::span<const std::vector<double>> noise_draws,
            double kl_scale);

struct ElboGrad {
  double value = 0.0;
  std::vector<double> d_mu;
  std::vector<double> d_rho;
};

/// Exact gradient of elbo() with respect to (mu, rho) for the supplied noise.
ElboGrad elbo_grad(const nn::MlpArchitecture& arch, const VariationalParams& vp,
                   std::span<const dataset::Sample> batch, const PriorSpec& prior, const LikelihoodSpec& like,
                   std::span<const std::vector<double>> noise_draws, double kl_scale);
ElboGrad elbo_grad(nn::MlpWorkspace& ws, const VariationalParams& vp, const nn::Batch& batch,
                   const PriorSpec& prior, const LikelihoodSpec& like,
                   std::span<const std::vector<double>> noise_draws, double kl_scale);

/// mu from init_weights, rho constant per layer so sigma = ratio * He scale.
VariationalParams init_variational(const nn::MlpArchitecture& arch, std::uint64_t seed, double init_sigma_ratio);

/// Validation metric: MSE of the N-draw mean prediction.
double mean_prediction_mse(nn::MlpWorkspace& ws, const VariationalParams& vp, const nn::Batch& batch, int draws,
                           std::uint64_t key);

struct BnnTrainResult {
  VariationalParams vp;
  std::vector<nn::EpochRecord> history;
  int best_epoch = 0;
  double best_val = 0.0;
};

/// Minibatch ELBO ascent; best snapshot by validation mean-prediction MSE.
/// Throws Error(Diverged) on a non-finite objective.
BnnTrainResult train_bnn(const dataset::Dataset& train, const dataset::Dataset& val, const nn::MlpArchitecture& arch,
                         const PriorSpec& prior, const LikelihoodSpec& like, const BnnHyper& hyper);

// ---------------------------------------------------------------- prediction

inline constexpr double kDefaultCovFloor = 0.02;

struct PredictiveDistribution {
  double mean = 0.0;
  double std = 0.0;
  double cov = 0.0;  // signed percent
  std::vector<double> samples;
  int odd_count = 0;  // samples farther than 2 std from the mean
};

/// 100 * std / mean, with |mean| floored at mu_floor and sign(0) = +1.
double signed_cov(double mean, double std, double mu_floor = kDefaultCovFloor);

/// Sample mean, (N-1) standard deviation, signed CoV and odd count.
PredictiveDistribution summarize(std::vector<double> samples, double mu_floor = kDefaultCovFloor);

/// N weight draws from the posterior; draw i uses stream derive(key(seed, Predict), i).
PredictiveDistribution predict(const nn::MlpArchitecture& arch, const VariationalParams& vp,
                               std::span<const double> input, int n, std::uint64_t seed,
                               double mu_floor = kDefaultCovFloor);

/// The N weight vectors predict() would draw for `seed`, materialized once so
/// a control loop can evaluate many inputs against the same posterior draws.
/// predict(arch, vp, x, n, seed) and PosteriorEnsemble(arch, vp, n, seed).predict(x)
/// agree bit for bit.
class PosteriorEnsemble {
 public:
  PosteriorEnsemble(nn::MlpArchitecture arch, const VariationalParams& vp, int n, std::uint64_t seed);

  PredictiveDistribution predict(std::span<const double> input, double mu_floor = kDefaultCovFloor) const;
  int size() const { return static_cast<int>(members_.size()); }
  const nn::MlpArchitecture& arch() const { return arch_; }

 private:
  nn::MlpArchitecture arch_;
  std::vector<nn::WeightVector> members_;
};

}  // namespace uadrive::bnn
