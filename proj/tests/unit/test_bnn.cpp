#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "uadrive/bnn.hpp"
#include "uadrive/error.hpp"
#include "uadrive/rng.hpp"

using namespace uadrive;
using namespace uadrive::bnn;

namespace {

VariationalParams random_vp(std::size_t P, std::uint64_t seed) {
  const rng::CounterRng g(rng::derive(0xB11, seed));
  VariationalParams vp;
  for (std::size_t i = 0; i < P; ++i) {
    vp.mu.push_back(0.6 * g.normal(2 * i));
    vp.rho.push_back(-3.0 + 2.5 * g.uniform(2 * i + 1));
  }
  return vp;
}

}  // namespace

TEST_CASE("softplus helpers") {
  CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)));
  CHECK(softplus(100.0) == 100.0);
  CHECK(softplus(-40.0) > 0.0);
  CHECK(softplus(-40.0) < 1e-17);
  for (double y : {1e-4, 0.05, 1.0, 3.0}) CHECK(softplus(inverse_softplus(y)) == doctest::Approx(y).epsilon(1e-12));
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(-800.0) == 0.0);
}

TEST_CASE("sample_weights") {
  VariationalParams vp{{0.5, -1.0}, {0.0, 0.0}};
  CHECK(sample_weights(vp, std::vector<double>{0.0, 0.0}) == vp.mu);
  vp.rho = {-40.0, -40.0};
  const auto w = sample_weights(vp, std::vector<double>{1.0, 1.0});
  CHECK(std::abs(w[0] - 0.5) < 1e-12);
  CHECK(std::abs(w[1] + 1.0) < 1e-12);
  VariationalParams unit{{0.0}, {inverse_softplus(1.0)}};
  CHECK(sample_weights(unit, std::vector<double>{1.5})[0] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK_THROWS_AS(sample_weights(vp, std::vector<double>{1.0}), Error);
}

TEST_CASE("reparameterized draws have the posterior moments") {
  const auto vp = random_vp(10, 1);
  const int n = 100000;
  std::vector<double> sum(10, 0.0), sum2(10, 0.0), eps(10);
  for (int d = 0; d < n; ++d) {
    rng::CounterRng(rng::derive(5, static_cast<std::uint64_t>(d))).fill_normal(eps);
    const auto w = sample_weights(vp, eps);
    for (int i = 0; i < 10; ++i) {
      sum[i] += w[i];
      sum2[i] += w[i] * w[i];
    }
  }
  const auto sigma = vp.sigma();
  for (int i = 0; i < 10; ++i) {
    const double mean = sum[i] / n;
    const double sd = std::sqrt(sum2[i] / n - mean * mean);
    CHECK(std::abs(mean - vp.mu[i]) < 3.0 * sigma[i] / std::sqrt(n));
    // Standard error of a sample standard deviation is about sigma / sqrt(2n).
    CHECK(std::abs(sd - sigma[i]) < 3.0 * sigma[i] / std::sqrt(2.0 * n));
  }
}

TEST_CASE("KL closed form") {
  const double unit_rho = inverse_softplus(1.0);
  CHECK(std::abs(kl_to_prior({{0.0}, {unit_rho}}, {1.0})) < 1e-12);
  CHECK(kl_to_prior({{1.0}, {unit_rho}}, {1.0}) == doctest::Approx(0.5).epsilon(1e-12));
  for (std::uint64_t s = 0; s < 20; ++s) CHECK(kl_to_prior(random_vp(5, s), {1.0}) >= 0.0);
}

TEST_CASE("KL agrees with Monte Carlo") {
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto vp = random_vp(4, 100 + s);
    const auto mc = oracle::mc_kl(vp, 1.3, 100000, rng::derive(9, s));
    CHECK(std::abs(mc.mean - kl_to_prior(vp, {1.3})) < 3.0 * mc.standard_error);
  }
}

TEST_CASE("ELBO value") {
  // One sample, a network that interpolates it exactly, collapsed posterior.
  const nn::MlpArchitecture arch{{1, 1, 1}};
  VariationalParams vp{{1.0, 0.0, 1.0, 0.25}, std::vector<double>(4, -40.0)};
  const std::vector<dataset::Sample> one{{{0.5}, 0.75}};
  const std::vector<std::vector<double>> zero(1, std::vector<double>(4, 0.0));
  CHECK(elbo(arch, vp, one, {1.0}, {0.05}, zero, 0.0) ==
        doctest::Approx(-std::log(0.05 * std::sqrt(2 * std::numbers::pi))).epsilon(1e-12));

  const auto p = oracle::toy_problem(11);
  const auto rvp = random_vp(p.arch.parameter_count(), 3);
  const auto draws = draw_noise(rvp.size(), 3, 17);
  const auto repeated = std::vector<std::vector<double>>(4, draws[0]);
  CHECK(elbo(p.arch, rvp, p.batch, {1.0}, {0.1}, repeated, 0.0) ==
        doctest::Approx(elbo(p.arch, rvp, p.batch, {1.0}, {0.1}, std::vector<std::vector<double>>{draws[0]}, 0.0)).epsilon(1e-12));
  CHECK(elbo(p.arch, rvp, p.batch, {0.7}, {0.1}, draws, 0.3) ==
        doctest::Approx(oracle::reference_elbo(p.arch, rvp, p.batch, 0.7, 0.1, draws, 0.3)).epsilon(1e-12));
}

TEST_CASE("elbo_grad matches finite differences on toy nets") {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto p = oracle::toy_problem(seed, 30);
    const auto vp = random_vp(p.arch.parameter_count(), seed);
    const auto noise = draw_noise(vp.size(), 2, seed);
    const PriorSpec prior{0.8};
    const LikelihoodSpec like{0.3};
    const double kl_scale = 0.25;
    const auto g = elbo_grad(p.arch, vp, p.batch, prior, like, noise, kl_scale);
    CHECK(g.value == doctest::Approx(elbo(p.arch, vp, p.batch, prior, like, noise, kl_scale)).epsilon(1e-12));
    std::vector<double> theta = vp.mu;
    theta.insert(theta.end(), vp.rho.begin(), vp.rho.end());
    const auto fd = oracle::central_differences(
        [&](const std::vector<double>& t) {
          VariationalParams q;
          q.mu.assign(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(vp.size()));
          q.rho.assign(t.begin() + static_cast<std::ptrdiff_t>(vp.size()), t.end());
          return elbo(p.arch, q, p.batch, prior, like, noise, kl_scale);
        },
        theta);
    std::vector<double> analytic = g.d_mu;
    analytic.insert(analytic.end(), g.d_rho.begin(), g.d_rho.end());
    worst = std::max(worst, oracle::max_relative_error(analytic, fd));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("stationary likelihood and KL linearity") {
  const nn::MlpArchitecture arch{{1, 2, 1}};
  VariationalParams vp{{0.5, -0.5, 0.1, 0.2, 1.0, 1.0, 0.3}, std::vector<double>(7, -2.0)};
  // Labels equal to the network output at W = mu.
  std::vector<dataset::Sample> batch{{{0.3}, 0.0}, {{0.9}, 0.0}};
  for (auto& s : batch) s.label = nn::forward(arch, vp.mu, s.features);
  const std::vector<std::vector<double>> zero(1, std::vector<double>(7, 0.0));
  const auto g = elbo_grad(arch, vp, batch, {1.0}, {0.05}, zero, 0.0);
  for (const double d : g.d_mu) CHECK(std::abs(d) < 1e-12);

  const auto draws = draw_noise(7, 2, 3);
  const auto g0 = elbo_grad(arch, vp, batch, {1.0}, {0.05}, draws, 0.0);
  const auto g1 = elbo_grad(arch, vp, batch, {1.0}, {0.05}, draws, 0.5);
  const auto g2 = elbo_grad(arch, vp, batch, {1.0}, {0.05}, draws, 1.0);
  for (std::size_t i = 0; i < 7; ++i) {
    CHECK((g2.d_mu[i] - g0.d_mu[i]) == doctest::Approx(2.0 * (g1.d_mu[i] - g0.d_mu[i])).epsilon(1e-12));
    CHECK((g2.d_rho[i] - g0.d_rho[i]) == doctest::Approx(2.0 * (g1.d_rho[i] - g0.d_rho[i])).epsilon(1e-12));
  }
}

TEST_CASE("train_bnn fits a ten-sample toy set and is deterministic") {
  dataset::Dataset ds;
  ds.meta.n_rays = 2;
  for (int i = 0; i < 10; ++i) {
    const double x = i / 10.0;
    ds.samples.push_back({{x, 1.0 - x}, 0.2 * x - 0.1});
  }
  BnnHyper h;
  h.train.max_epochs = 1500;
  h.train.patience = 1499;
  h.train.batch_size = 10;
  h.train.adam.learning_rate = 3e-3;
  h.train.seed = 5;
  const nn::MlpArchitecture arch{{2, 16, 16, 1}};
  const auto r = train_bnn(ds, ds, arch, {1.0}, {0.01}, h);
  CHECK(r.best_val < 1e-3);
  double best = 1e300;
  for (const auto& e : r.history) best = std::min(best, e.val);
  CHECK(r.best_val == best);
  nn::MlpWorkspace ws(arch);
  CHECK(mean_prediction_mse(ws, r.vp, nn::Batch::from_samples(ds.samples), h.pred_samples,
                            rng::stream_key(5, rng::Stream::ValidationNoise)) == best);

  h.train.max_epochs = 20;
  h.train.patience = 5;
  const auto a = train_bnn(ds, ds, arch, {1.0}, {0.05}, h);
  const auto b = train_bnn(ds, ds, arch, {1.0}, {0.05}, h);
  for (double v : a.vp.mu) REQUIRE(std::isfinite(v));
  CHECK(a.history.size() == b.history.size());
  CHECK(a.vp.mu == b.vp.mu);
  CHECK(a.vp.rho == b.vp.rho);
}

TEST_CASE("init_variational targets a fraction of the He scale") {
  const auto arch = nn::MlpArchitecture::steering();
  const auto vp = init_variational(arch, 3, 0.05);
  CHECK(vp.mu == nn::init_weights(arch, 3));
  const auto sigma = vp.sigma();
  CHECK(sigma.front() == doctest::Approx(0.05 * std::sqrt(2.0 / 19.0)).epsilon(1e-12));
  CHECK(sigma.back() == doctest::Approx(0.05 * std::sqrt(2.0 / 16.0)).epsilon(1e-12));
}

TEST_CASE("signed CoV") {
  CHECK(signed_cov(0.2, 0.01) == doctest::Approx(5.0));
  CHECK(signed_cov(-0.2, 0.01) == doctest::Approx(-5.0));
  CHECK(signed_cov(1e-9, 0.001, 0.02) == doctest::Approx(5.0));
  CHECK(signed_cov(0.0, 0.001, 0.02) == doctest::Approx(5.0));
  CHECK(signed_cov(-1e-9, 0.001, 0.02) == doctest::Approx(-5.0));
}

TEST_CASE("summarize") {
  const auto p = summarize({0.1, 0.2, 0.3});
  CHECK(p.mean == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(p.std == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(p.cov == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(p.odd_count == 0);
  const auto q = summarize({0, 0, 0, 0, 0, 0, 0, 0, 0, 1});
  CHECK(q.odd_count == 1);
  CHECK(summarize({0.4, 0.4, 0.4}).odd_count == 0);
}

TEST_CASE("predict") {
  const auto arch = nn::MlpArchitecture::steering();
  auto vp = init_variational(arch, 1, 0.05);
  const std::vector<double> x(19, 0.3);
  const auto a = predict(arch, vp, x, 30, 7);
  const auto b = predict(arch, vp, x, 30, 7);
  CHECK(a.samples == b.samples);
  CHECK(a.odd_count <= 30);
  CHECK(a.samples.size() == 30);
  const PosteriorEnsemble ens(arch, vp, 30, 7);
  const auto c = ens.predict(x);
  CHECK(c.samples == a.samples);
  CHECK(c.mean == a.mean);
  CHECK(c.std == a.std);
  CHECK_THROWS_AS(predict(arch, vp, x, 1, 7), Error);

  vp.rho.assign(vp.size(), -40.0);
  const auto d = predict(arch, vp, x, 30, 7);
  // softplus(-40) ~ 4e-18: the draws agree to rounding.
  CHECK(d.std < 1e-12);
  CHECK(std::abs(d.cov) < 1e-9);
}

TEST_CASE("mean estimate error shrinks as one over root N") {
  const nn::MlpArchitecture arch{{3, 8, 1}};
  const auto vp = init_variational(arch, 2, 0.5);
  const std::vector<double> x{0.2, 0.5, 0.9};
  auto spread = [&](int n) {
    double s = 0, s2 = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const double m = predict(arch, vp, x, n, seed).mean;
      s += m;
      s2 += m * m;
    }
    return std::sqrt((s2 - s * s / 100.0) / 99.0);
  };
  const double ratio = spread(10) / spread(1000);
  CHECK(ratio > 10.0 * 0.7);
  CHECK(ratio < 10.0 * 1.3);
}
