#include "uadrive/bnn.hpp"

#include <cmath>
#include <numbers>

#include "uadrive/error.hpp"
#include "uadrive/rng.hpp"

namespace uadrive::bnn {

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

double inverse_softplus(double y) { return y > 30.0 ? y : std::log(std::expm1(y)); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<double> VariationalParams::sigma() const {
  std::vector<double> s(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) s[i] = softplus(rho[i]);
  return s;
}

void BnnHyper::validate() const {
  train.validate();
  if (mc_samples < 1) throw Error(ErrorCode::ConfigInvalid, "bnn.mc_samples must be at least 1");
  if (pred_samples < 2) throw Error(ErrorCode::ConfigInvalid, "bnn.pred_samples must be at least 2");
  if (!(init_sigma_ratio > 0.0)) throw Error(ErrorCode::ConfigInvalid, "bnn.init_sigma_ratio must be positive");
}

namespace {

void check_shapes(const VariationalParams& vp, std::size_t expected) {
  if (vp.mu.size() != vp.rho.size() || vp.mu.size() != expected) {
    throw Error(ErrorCode::DimensionMismatch, "variational parameters have " + std::to_string(vp.mu.size()) + "/" +
                                                  std::to_string(vp.rho.size()) + " entries, expected " +
                                                  std::to_string(expected));
  }
}

void check_noise(std::span<const std::vector<double>> draws, std::size_t dim) {
  if (draws.empty()) throw Error(ErrorCode::DimensionMismatch, "at least one noise draw is required");
  for (const auto& d : draws) {
    if (d.size() != dim) throw Error(ErrorCode::DimensionMismatch, "noise draw length differs from parameter count");
  }
}

}  // namespace

nn::WeightVector sample_weights(const VariationalParams& vp, std::span<const double> noise) {
  if (vp.mu.size() != vp.rho.size() || noise.size() != vp.mu.size()) {
    throw Error(ErrorCode::DimensionMismatch, "noise length differs from the variational parameter count");
  }
  nn::WeightVector w(vp.mu.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = vp.mu[i] + softplus(vp.rho[i]) * noise[i];
  return w;
}

double kl_to_prior(const VariationalParams& vp, const PriorSpec& prior) {
  const double sp2 = prior.sigma * prior.sigma;
  double kl = 0.0;
  for (std::size_t i = 0; i < vp.mu.size(); ++i) {
    const double s = softplus(vp.rho[i]);
    kl += std::log(prior.sigma / s) + (s * s + vp.mu[i] * vp.mu[i]) / (2.0 * sp2) - 0.5;
  }
  return kl;
}

std::vector<std::vector<double>> draw_noise(std::size_t dim, int count, std::uint64_t key) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(count), std::vector<double>(dim));
  for (int l = 0; l < count; ++l) {
    rng::CounterRng(rng::derive(key, static_cast<std::uint64_t>(l))).fill_normal(out[static_cast<std::size_t>(l)]);
  }
  return out;
}

// ---------------------------------------------------------------- ELBO

ElboGrad elbo_grad(nn::MlpWorkspace& ws, const VariationalParams& vp, const nn::Batch& batch,
                   const PriorSpec& prior, const LikelihoodSpec& like,
                   std::span<const std::vector<double>> noise_draws, double kl_scale) {
  const std::size_t P = ws.arch().parameter_count();
  check_shapes(vp, P);
  check_noise(noise_draws, P);
  if (batch.size() == 0) throw Error(ErrorCode::DimensionMismatch, "empty batch");

  const double inv_l = 1.0 / static_cast<double>(noise_draws.size());
  const double s2n = like.noise_sigma * like.noise_sigma;
  const double log_norm = -0.5 * std::log(2.0 * std::numbers::pi * s2n);
  const double n = static_cast<double>(batch.size());

  const std::vector<double> sigma = vp.sigma();
  std::vector<double> sig_rho(P);
  for (std::size_t i = 0; i < P; ++i) sig_rho[i] = sigmoid(vp.rho[i]);

  ElboGrad g;
  g.d_mu.assign(P, 0.0);
  g.d_rho.assign(P, 0.0);
  std::vector<double> w(P), gw(P);
  for (const auto& eps : noise_draws) {
    for (std::size_t i = 0; i < P; ++i) w[i] = vp.mu[i] + sigma[i] * eps[i];
    const Eigen::RowVectorXd resid = ws.forward(w, batch.x) - batch.y;
    g.value += inv_l * (n * log_norm - resid.squaredNorm() / (2.0 * s2n));
    std::fill(gw.begin(), gw.end(), 0.0);
    ws.backward(w, (-1.0 / s2n) * resid, gw);
    for (std::size_t i = 0; i < P; ++i) {
      g.d_mu[i] += inv_l * gw[i];
      g.d_rho[i] += inv_l * gw[i] * eps[i] * sig_rho[i];
    }
  }

  const double sp2 = prior.sigma * prior.sigma;
  double kl = 0.0;
  for (std::size_t i = 0; i < P; ++i) {
    const double s = sigma[i];
    kl += std::log(prior.sigma / s) + (s * s + vp.mu[i] * vp.mu[i]) / (2.0 * sp2) - 0.5;
    g.d_mu[i] -= kl_scale * vp.mu[i] / sp2;
    g.d_rho[i] -= kl_scale * (s / sp2 - 1.0 / s) * sig_rho[i];
  }
  g.value -= kl_scale * kl;
  return g;
}

ElboGrad elbo_grad(const nn::MlpArchitecture& arch, const VariationalParams& vp,
                   std::span<const dataset::Sample> batch, const PriorSpec& prior, const LikelihoodSpec& like,
                   std::span<const std::vector<double>> noise_draws, double kl_scale) {
  nn::MlpWorkspace ws(arch);
  return elbo_grad(ws, vp, nn::Batch::from_samples(batch), prior, like, noise_draws, kl_scale);
}

double elbo(const nn::MlpArchitecture& arch, const VariationalParams& vp, std::span<const dataset::Sample> batch,
            const PriorSpec& prior, const LikelihoodSpec& like, std::span<const std::vector<double>> noise_draws,
            double kl_scale) {
  const std::size_t P = arch.parameter_count();
  check_shapes(vp, P);
  check_noise(noise_draws, P);
  nn::MlpWorkspace ws(arch);
  const nn::Batch b = nn::Batch::from_samples(batch);
  const double s2n = like.noise_sigma * like.noise_sigma;
  const double log_norm = -0.5 * std::log(2.0 * std::numbers::pi * s2n);
  double expected_ll = 0.0;
  for (const auto& eps : noise_draws) {
    const auto w = sample_weights(vp, eps);
    const Eigen::RowVectorXd resid = ws.forward(w, b.x) - b.y;
    expected_ll += static_cast<double>(b.size()) * log_norm - resid.squaredNorm() / (2.0 * s2n);
  }
  expected_ll /= static_cast<double>(noise_draws.size());
  return expected_ll - kl_scale * kl_to_prior(vp, prior);
}

// ---------------------------------------------------------------- training

VariationalParams init_variational(const nn::MlpArchitecture& arch, std::uint64_t seed, double init_sigma_ratio) {
  VariationalParams vp;
  vp.mu = nn::init_weights(arch, seed);
  vp.rho.resize(vp.mu.size());
  for (std::size_t l = 0; l < arch.layer_count(); ++l) {
    const double rho = inverse_softplus(init_sigma_ratio * nn::he_scale(arch, l));
    const std::size_t begin = arch.weight_offset(l);
    const std::size_t end = arch.weight_offset(l + 1);
    std::fill(vp.rho.begin() + static_cast<std::ptrdiff_t>(begin), vp.rho.begin() + static_cast<std::ptrdiff_t>(end), rho);
  }
  return vp;
}

double mean_prediction_mse(nn::MlpWorkspace& ws, const VariationalParams& vp, const nn::Batch& batch, int draws,
                           std::uint64_t key) {
  const std::size_t P = ws.arch().parameter_count();
  check_shapes(vp, P);
  Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(batch.size()));
  std::vector<double> eps(P);
  for (int i = 0; i < draws; ++i) {
    rng::CounterRng(rng::derive(key, static_cast<std::uint64_t>(i))).fill_normal(eps);
    acc += ws.forward(sample_weights(vp, eps), batch.x);
  }
  acc /= static_cast<double>(draws);
  return (acc - batch.y).squaredNorm() / static_cast<double>(batch.size());
}

BnnTrainResult train_bnn(const dataset::Dataset& train, const dataset::Dataset& val, const nn::MlpArchitecture& arch,
                         const PriorSpec& prior, const LikelihoodSpec& like, const BnnHyper& hyper) {
  hyper.validate();
  arch.validate();
  if (!(prior.sigma > 0.0) || !(like.noise_sigma > 0.0)) {
    throw Error(ErrorCode::ConfigInvalid, "prior and likelihood scales must be positive");
  }
  if (train.empty() || val.empty()) throw Error(ErrorCode::EmptySplit, "training needs non-empty train and val sets");

  const nn::Batch all_train = nn::Batch::from_samples(train.samples);
  const nn::Batch all_val = nn::Batch::from_samples(val.samples);
  if (all_train.x.rows() != all_val.x.rows() || static_cast<std::size_t>(all_train.x.rows()) != arch.input_size()) {
    throw Error(ErrorCode::DimensionMismatch, "dataset feature width does not match the network input");
  }

  const auto& th = hyper.train;
  nn::MlpWorkspace ws(arch);
  VariationalParams vp = init_variational(arch, th.seed, hyper.init_sigma_ratio);
  const std::size_t P = vp.size();
  nn::AdamState opt_mu(P), opt_rho(P);
  nn::EarlyStopping stopper(th.patience);
  const auto noise_root = rng::stream_key(th.seed, rng::Stream::ElboNoise);
  const auto val_key = rng::stream_key(th.seed, rng::Stream::ValidationNoise);
  const double n_train = static_cast<double>(train.size());

  BnnTrainResult result;
  result.vp = vp;
  std::vector<double> step(P);
  for (int epoch = 1; epoch <= th.max_epochs; ++epoch) {
    const auto epoch_key = rng::derive(noise_root, static_cast<std::uint64_t>(epoch));
    const auto plan = dataset::batches(train.size(), static_cast<std::size_t>(th.batch_size), th.seed,
                                       static_cast<std::uint64_t>(epoch));
    double elbo_sum = 0.0;
    for (std::size_t bi = 0; bi < plan.size(); ++bi) {
      const nn::Batch b = nn::Batch::gather(all_train, plan[bi]);
      const auto noise = draw_noise(P, hyper.mc_samples, rng::derive(epoch_key, bi));
      const double kl_scale = static_cast<double>(b.size()) / n_train;
      const auto g = elbo_grad(ws, vp, b, prior, like, noise, kl_scale);
      if (!std::isfinite(g.value)) {
        throw Error(ErrorCode::Diverged, "ELBO became non-finite at epoch " + std::to_string(epoch));
      }
      elbo_sum += g.value;
      // Ascent on the ELBO through a descent optimizer.
      for (std::size_t i = 0; i < P; ++i) step[i] = -g.d_mu[i];
      opt_mu.step(vp.mu, step, th.adam);
      for (std::size_t i = 0; i < P; ++i) step[i] = -g.d_rho[i];
      opt_rho.step(vp.rho, step, th.adam);
    }
    const double val_mse = mean_prediction_mse(ws, vp, all_val, hyper.pred_samples, val_key);
    if (!std::isfinite(val_mse)) {
      throw Error(ErrorCode::Diverged, "validation MSE became non-finite at epoch " + std::to_string(epoch));
    }
    result.history.push_back({epoch, elbo_sum, val_mse});
    if (stopper.observe(epoch, val_mse)) result.vp = vp;
    if (stopper.should_stop()) break;
  }
  result.best_epoch = stopper.best_epoch();
  result.best_val = stopper.best_value();
  return result;
}

// ---------------------------------------------------------------- prediction

double signed_cov(double mean, double std, double mu_floor) {
  const double denom = std::abs(mean) >= mu_floor ? mean : (mean < 0.0 ? -mu_floor : mu_floor);
  return 100.0 * std / denom;
}

PredictiveDistribution summarize(std::vector<double> samples, double mu_floor) {
  PredictiveDistribution p;
  p.samples = std::move(samples);
  const double n = static_cast<double>(p.samples.size());
  if (p.samples.empty()) return p;
  double sum = 0.0;
  for (const double s : p.samples) sum += s;
  p.mean = sum / n;
  double ss = 0.0;
  for (const double s : p.samples) ss += (s - p.mean) * (s - p.mean);
  p.std = p.samples.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  p.cov = signed_cov(p.mean, p.std, mu_floor);
  if (p.std > 0.0) {
    for (const double s : p.samples) {
      if (std::abs(s - p.mean) > 2.0 * p.std) ++p.odd_count;
    }
  }
  return p;
}

namespace {

nn::WeightVector posterior_draw(const VariationalParams& vp, std::uint64_t key, int i, std::vector<double>& eps) {
  rng::CounterRng(rng::derive(key, static_cast<std::uint64_t>(i))).fill_normal(eps);
  return sample_weights(vp, eps);
}

}  // namespace

PredictiveDistribution predict(const nn::MlpArchitecture& arch, const VariationalParams& vp,
                               std::span<const double> input, int n, std::uint64_t seed, double mu_floor) {
  if (n < 2) throw Error(ErrorCode::ConfigInvalid, "predictive sampling needs at least 2 draws");
  check_shapes(vp, arch.parameter_count());
  const auto key = rng::stream_key(seed, rng::Stream::Predict);
  std::vector<double> eps(vp.size());
  std::vector<double> outs;
  outs.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    outs.push_back(nn::forward(arch, posterior_draw(vp, key, i, eps), input));
  }
  return summarize(std::move(outs), mu_floor);
}

PosteriorEnsemble::PosteriorEnsemble(nn::MlpArchitecture arch, const VariationalParams& vp, int n, std::uint64_t seed)
    : arch_(std::move(arch)) {
  if (n < 2) throw Error(ErrorCode::ConfigInvalid, "predictive sampling needs at least 2 draws");
  check_shapes(vp, arch_.parameter_count());
  const auto key = rng::stream_key(seed, rng::Stream::Predict);
  std::vector<double> eps(vp.size());
  members_.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) members_.push_back(posterior_draw(vp, key, i, eps));
}

PredictiveDistribution PosteriorEnsemble::predict(std::span<const double> input, double mu_floor) const {
  std::vector<double> outs;
  outs.reserve(members_.size());
  for (const auto& w : members_) outs.push_back(nn::forward(arch_, w, input));
  return summarize(std::move(outs), mu_floor);
}

}  // namespace uadrive::bnn
