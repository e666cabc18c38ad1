#include <doctest.h>

#include "uadrive/error.hpp"
#include "uadrive/train.hpp"

using namespace uadrive;
using namespace uadrive::nn;

namespace {

dataset::Dataset toy(std::size_t n, double shift) {
  dataset::Dataset ds;
  ds.meta.n_rays = 2;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(n);
    ds.samples.push_back({{x, 1.0 - x}, 0.3 * x - 0.1 + shift});
  }
  return ds;
}

}  // namespace

TEST_CASE("early stopping bookkeeping") {
  EarlyStopping es(3);
  CHECK(es.observe(1, 1.0));
  CHECK_FALSE(es.observe(2, 2.0));
  CHECK_FALSE(es.observe(3, 3.0));
  CHECK_FALSE(es.should_stop());
  CHECK_FALSE(es.observe(4, 1.0));  // ties are not improvements
  CHECK(es.should_stop());
  CHECK(es.best_epoch() == 1);
  CHECK(es.best_value() == 1.0);
}

TEST_CASE("overfits a ten-sample dataset") {
  const auto ds = toy(10, 0.0);
  TrainHyper h;
  h.max_epochs = 2000;
  h.patience = 1999;
  h.batch_size = 10;
  h.adam.learning_rate = 3e-3;
  h.seed = 1;
  const MlpArchitecture arch{{2, 16, 16, 1}};
  const auto r = train_dnn(ds, ds, arch, h);
  MlpWorkspace ws(arch);
  CHECK(mse(ws, r.weights, Batch::from_samples(ds.samples)) < 1e-4);
  CHECK(r.history.size() <= 2000);
}

TEST_CASE("strictly worsening validation stops at 1 + patience") {
  // Validation labels far from the training labels: every training epoch moves
  // the network toward the training data and away from the validation data.
  const auto train = toy(32, 3.0);
  const auto val = toy(8, -5.0);
  TrainHyper h;
  h.max_epochs = 100;
  h.patience = 5;
  h.batch_size = 8;
  h.seed = 2;
  h.adam.learning_rate = 1e-2;
  const MlpArchitecture arch{{2, 8, 1}};
  const auto r = train_dnn(train, val, arch, h);
  bool worsening = true;
  for (std::size_t i = 1; i < r.history.size(); ++i) worsening = worsening && r.history[i].val > r.history[i - 1].val;
  REQUIRE(worsening);
  CHECK(r.history.size() == 6);
  CHECK(r.best_epoch == 1);
  MlpWorkspace ws(arch);
  CHECK(mse(ws, r.weights, Batch::from_samples(val.samples)) == r.history.front().val);
}

TEST_CASE("best snapshot and determinism") {
  const auto train = toy(64, 0.0);
  const auto val = toy(16, 0.01);
  TrainHyper h;
  h.max_epochs = 60;
  h.patience = 10;
  h.batch_size = 16;
  h.seed = 4;
  const MlpArchitecture arch{{2, 8, 8, 1}};
  const auto a = train_dnn(train, val, arch, h);
  const auto b = train_dnn(train, val, arch, h);
  CHECK(a.weights == b.weights);
  double best = 1e300;
  for (const auto& r : a.history) best = std::min(best, r.val);
  CHECK(a.best_val == best);
  MlpWorkspace ws(arch);
  CHECK(mse(ws, a.weights, Batch::from_samples(val.samples)) == best);
}

TEST_CASE("hyperparameter and input validation") {
  TrainHyper h;
  h.patience = h.max_epochs;
  CHECK_THROWS_AS(h.validate(), Error);
  h = TrainHyper{};
  h.batch_size = 0;
  CHECK_THROWS_AS(h.validate(), Error);
  CHECK_THROWS_AS(train_dnn(dataset::Dataset{}, toy(4, 0), MlpArchitecture{{2, 4, 1}}, TrainHyper{}), Error);
}

TEST_CASE("divergence is reported") {
  auto ds = toy(8, 0.0);
  ds.samples[0].label = 1e300;
  TrainHyper h;
  h.max_epochs = 5;
  h.patience = 2;
  try {
    train_dnn(ds, ds, MlpArchitecture{{2, 4, 1}}, h);
    FAIL("expected Diverged");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Diverged);
  }
}
