#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "support.hpp"
#include "uadrive/dataset.hpp"
#include "uadrive/error.hpp"
#include "uadrive/textio.hpp"

using namespace uadrive;
using namespace uadrive::dataset;

namespace {

Dataset synthetic(std::size_t n) {
  Dataset ds;
  ds.meta.track = "synthetic";
  ds.meta.n_rays = 3;
  ds.meta.max_range = 100.0;
  ds.meta.speeds_mph = {60.0};
  for (std::size_t i = 0; i < n; ++i) {
    ds.samples.push_back({{0.001 * static_cast<double>(i), 0.5, 1.0}, -0.5 + 0.001 * static_cast<double>(i)});
  }
  ds.refresh_digest();
  return ds;
}

ErrorCode load_error(const std::string& text) {
  try {
    from_csv(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("from_csv did not throw");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("one lap sample count follows the lap time") {
  const auto t = track::compile_track(*track::find_builtin("train-loop"));
  GenerationConfig cfg;
  cfg.speeds_mph = {60.0};
  cfg.laps_per_speed = 1;
  cfg.seed = 1;
  const auto ds = generate(t, pid::PidGains{}, cfg);
  const double expected = t.total_length() / 26.8224 / 0.002 / 25.0;
  CHECK(std::abs(static_cast<double>(ds.size()) - expected) / expected < 0.01);
  CHECK(ds.meta.n_rays == 19);
  for (const auto& s : ds.samples) {
    CHECK(s.features.size() == 19);
    CHECK(std::abs(s.label) <= 1.0);
  }
}

TEST_CASE("decimation is a subsample of the dense recording") {
  const auto t = track::compile_track(test_support::stadium(300.0, 80.0));
  GenerationConfig dense;
  dense.speeds_mph = {60.0};
  dense.laps_per_speed = 1;
  dense.record_every = 1;
  dense.seed = 3;
  GenerationConfig sparse = dense;
  sparse.record_every = 25;
  const auto a = generate(t, pid::PidGains{}, dense);
  const auto b = generate(t, pid::PidGains{}, sparse);
  REQUIRE(b.size() == (a.size() + 24) / 25);
  for (std::size_t i = 0; i < b.size(); ++i) {
    CHECK(b.samples[i].features == a.samples[25 * i].features);
    CHECK(b.samples[i].label == a.samples[25 * i].label);
  }
}

TEST_CASE("multi-speed generation is deterministic") {
  const auto t = track::compile_track(test_support::stadium(300.0, 80.0));
  GenerationConfig cfg;
  cfg.seed = 9;
  const auto a = generate(t, pid::PidGains{}, cfg);
  const auto b = generate(t, pid::PidGains{}, cfg);
  CHECK(a.meta.speeds_mph.size() == 3);
  CHECK(a.meta.digest == b.meta.digest);
  cfg.seed = 10;
  CHECK(generate(t, pid::PidGains{}, cfg).meta.digest != a.meta.digest);
}

TEST_CASE("a hopeless expert raises ExpertCrashed") {
  const auto t = track::compile_track(*track::find_builtin("hairpin"));
  GenerationConfig cfg;
  cfg.speeds_mph = {60.0};
  pid::PidGains weak{0.001, 0.0, 0.0, 0.0, 5.0};
  try {
    generate(t, weak, cfg);
    FAIL("expected ExpertCrashed");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ExpertCrashed);
  }
}

TEST_CASE("split sizes, determinism and multiset preservation") {
  const auto ds = synthetic(1000);
  const auto [train, val] = split(ds, 0.9, 4);
  CHECK(train.size() == 900);
  CHECK(val.size() == 100);
  const auto again = split(ds, 0.9, 4);
  CHECK(again.first.meta.digest == train.meta.digest);
  std::vector<double> labels;
  for (const auto& s : train.samples) labels.push_back(s.label);
  for (const auto& s : val.samples) labels.push_back(s.label);
  std::sort(labels.begin(), labels.end());
  for (std::size_t i = 0; i < labels.size(); ++i) CHECK(labels[i] == ds.samples[i].label);

  const auto small = split(synthetic(10), 0.9, 1);
  CHECK(small.first.size() == 9);
  CHECK(small.second.size() == 1);
  CHECK_THROWS_AS(split(synthetic(1), 0.9, 1), Error);
  CHECK_THROWS_AS(split(ds, 1.0, 1), Error);
}

TEST_CASE("csv round trip and validation") {
  const auto t = track::compile_track(test_support::stadium(300.0, 80.0));
  GenerationConfig cfg;
  cfg.speeds_mph = {55.0};
  cfg.laps_per_speed = 1;
  const auto ds = generate(t, pid::PidGains{}, cfg);
  const auto text = to_csv(ds);
  const auto back = from_csv(text);
  CHECK(back.meta.digest == ds.meta.digest);
  CHECK(back.size() == ds.size());
  CHECK(to_csv(back) == text);
  for (std::size_t i = 0; i < ds.size(); ++i) CHECK(back.samples[i].features == ds.samples[i].features);

  const std::string header = "# n_rays=19\n# max_range=100.0\n# track=x\n# speeds=60\n# seed=0\n";
  std::string cols;
  for (int i = 0; i < 19; ++i) cols += "d_" + std::to_string(i) + ",";
  cols += "steer\n";
  std::string row20;
  for (int i = 0; i < 20; ++i) row20 += "0.5,";
  row20 += "0.1\n";
  CHECK(load_error(header + "# digest=" + textio::content_digest(row20) + "\n" + cols + row20) ==
        ErrorCode::MalformedRow);

  std::string bad_label;
  for (int i = 0; i < 19; ++i) bad_label += "0.5,";
  bad_label += "1.5\n";
  CHECK(load_error(header + "# digest=" + textio::content_digest(bad_label) + "\n" + cols + bad_label) ==
        ErrorCode::MalformedRow);

  auto tampered = text;
  tampered.back() = '9';
  tampered += "\n";
  CHECK(load_error(tampered) == ErrorCode::DigestMismatch);
}

TEST_CASE("minibatch plans") {
  const auto b = batches(10, 4, 1, 0);
  REQUIRE(b.size() == 3);
  CHECK(b[0].size() == 4);
  CHECK(b[1].size() == 4);
  CHECK(b[2].size() == 2);
  std::vector<std::size_t> all;
  for (const auto& x : b) all.insert(all.end(), x.begin(), x.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < 10; ++i) CHECK(all[i] == i);
  CHECK(batches(10, 4, 1, 0) == b);
  CHECK(batches(100, 100, 1, 1) != batches(100, 100, 1, 2));
}
