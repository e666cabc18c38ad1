#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "support.hpp"
#include "uadrive/error.hpp"
#include "uadrive/report.hpp"
#include "uadrive/simloop.hpp"
#include "uadrive/textio.hpp"

using namespace uadrive;
using namespace uadrive::sim;

namespace {

checkpoint::BnnCheckpoint random_bnn(double ratio, std::uint64_t seed) {
  const auto arch = nn::MlpArchitecture::steering();
  return {arch, bnn::init_variational(arch, seed, ratio), {}, {}, seed};
}

ErrorCode error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("pid completes the training loop at 60 mph") {
  const auto t = track::compile_track(*track::find_builtin("train-loop"));
  const auto r = run_episode(t, EpisodeConfig{}, {});
  CHECK(r.outcome == Outcome::LapCompleted);
  CHECK(r.interventions == 0);
  CHECK(r.max_abs_offset < 3.75);
  CHECK(r.lap_time == doctest::Approx(r.steps * 0.002));
  CHECK(r.records.size() == static_cast<std::size_t>(r.steps));
  for (std::size_t k = 0; k < r.records.size(); ++k) {
    CHECK(r.records[k].t == static_cast<double>(k + 1) * 0.002);
    CHECK(std::abs(r.records[k].steer) <= 1.0);
    CHECK_FALSE(r.records[k].bnn.has_value());
  }
}

TEST_CASE("step limit") {
  const auto t = track::compile_track(test_support::stadium());
  EpisodeConfig cfg;
  cfg.max_steps = 1;
  const auto r = run_episode(t, cfg, {});
  CHECK(r.outcome == Outcome::StepLimit);
  CHECK(r.records.size() == 1);
  CHECK(cfg.resolved_max_steps(t) == 1);
  cfg.max_steps = 0;
  CHECK(cfg.resolved_max_steps(t) ==
        static_cast<long>(std::ceil(10.0 * t.total_length() / (vehicle::mph_to_mps(60.0) * 0.002))));
}

TEST_CASE("crash detection") {
  const auto t = track::compile_track(test_support::stadium());
  EpisodeConfig cfg;
  cfg.controller = ControllerKind::Dnn;
  const auto arch = nn::MlpArchitecture::steering();
  checkpoint::DnnCheckpoint hard_left{arch, nn::WeightVector(arch.parameter_count(), 0.0), 0};
  hard_left.weights.back() = 1.0;  // output bias: constant full-left command
  const auto r = run_episode(t, cfg, {&hard_left, nullptr});
  CHECK(r.outcome == Outcome::Crashed);
  CHECK(std::abs(r.records.back().offset) > 7.5);
  for (std::size_t k = 0; k + 1 < r.records.size(); ++k) CHECK(std::abs(r.records[k].offset) <= 7.5);
  CHECK(r.records.front().steer == 1.0);
}

TEST_CASE("collapsed posterior never triggers the supervisor") {
  const auto t = track::compile_track(test_support::stadium());
  auto model = random_bnn(0.05, 3);
  model.vp.rho.assign(model.vp.size(), -40.0);
  EpisodeConfig cfg;
  cfg.controller = ControllerKind::Bnn;
  cfg.supervisor_enabled = true;
  cfg.max_steps = 3000;
  const auto r = run_episode(t, cfg, {nullptr, &model});
  CHECK(r.interventions == 0);
  for (const auto& rec : r.records) {
    REQUIRE(rec.bnn.has_value());
    CHECK(std::abs(rec.bnn->cov) < 1e-9);
  }
}

TEST_CASE("log replay reproduces the live supervisor decisions") {
  const auto t = track::compile_track(test_support::stadium(300.0, 60.0));
  const auto model = random_bnn(0.3, 5);
  EpisodeConfig cfg;
  cfg.controller = ControllerKind::Bnn;
  cfg.supervisor_enabled = true;
  cfg.supervisor = {3.0, 5};
  cfg.max_steps = 4000;
  const auto r = run_episode(t, cfg, {nullptr, &model});
  const auto parsed = report::parse_log(log_csv(r));
  REQUIRE(parsed.size() == r.records.size());
  supervisor::SupervisorState s;
  long odd_total = 0;
  for (std::size_t k = 0; k < parsed.size(); ++k) {
    REQUIRE(parsed[k].bnn.has_value());
    s = supervisor::update(s, parsed[k].bnn->cov, cfg.supervisor);
    CHECK(parsed[k].mode == s.mode);
    CHECK(parsed[k].bnn->odd_total >= odd_total);
    odd_total = parsed[k].bnn->odd_total;
    CHECK(parsed[k].t == r.records[k].t);
    CHECK(parsed[k].x == r.records[k].x);
  }
  CHECK(s.intervention_count == r.interventions);
  CHECK(r.interventions >= 1);
}

TEST_CASE("episode determinism") {
  const auto t = track::compile_track(test_support::stadium());
  const auto model = random_bnn(0.1, 8);
  EpisodeConfig cfg;
  cfg.controller = ControllerKind::Bnn;
  cfg.max_steps = 500;
  CHECK(log_csv(run_episode(t, cfg, {nullptr, &model})) == log_csv(run_episode(t, cfg, {nullptr, &model})));
}

TEST_CASE("configuration errors") {
  const auto t = track::compile_track(test_support::stadium());
  EpisodeConfig cfg;
  cfg.controller = ControllerKind::Dnn;
  cfg.supervisor_enabled = true;
  CHECK(error_of([&] { run_episode(t, cfg, {}); }) == ErrorCode::ConfigInvalid);
  cfg.supervisor_enabled = false;
  CHECK(error_of([&] { run_episode(t, cfg, {}); }) == ErrorCode::MissingModel);
  cfg.controller = ControllerKind::Bnn;
  CHECK(error_of([&] { run_episode(t, cfg, {}); }) == ErrorCode::MissingModel);
  CHECK(parse_controller("bnn") == ControllerKind::Bnn);
  CHECK(error_of([] { parse_controller("rf"); }) == ErrorCode::ConfigInvalid);
}

TEST_CASE("log format") {
  const auto t = track::compile_track(test_support::stadium());
  EpisodeConfig cfg;
  cfg.max_steps = 2;
  const auto text = log_csv(run_episode(t, cfg, {}));
  const auto lines = textio::split(text, '\n');
  CHECK(lines[0] == "t,x,y,heading,s,offset,steer,mean,std,cov,odd,odd_total,mode");
  CHECK(lines[1].starts_with("0.002,"));
  CHECK(lines[1].ends_with(",,,,,autonomous"));
}

TEST_CASE("evaluation suites") {
  EpisodeConfig cfg;
  cfg.max_steps = 100;
  CHECK(evaluate_suite({}, cfg, {}, {}).rows.empty());
  auto broken = test_support::stadium();
  broken.name = "broken";
  broken.segments.pop_back();
  const auto dir = std::filesystem::temp_directory_path() / "uadrive_suite_test";
  std::filesystem::remove_all(dir);
  const auto rep = evaluate_suite({test_support::stadium(), broken, *track::find_builtin("eval-a")}, cfg, {}, dir);
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.rows[0].result.has_value());
  CHECK_FALSE(rep.rows[1].result.has_value());
  CHECK(rep.rows[1].error.find("NonClosedLoop") != std::string::npos);
  CHECK(rep.rows[2].track == "eval-a");
  CHECK(std::filesystem::exists(dir / "eval-a.csv"));
  CHECK(std::filesystem::exists(dir / "eval-a.csv.json"));
  CHECK(textio::split(rep.to_csv(), '\n').size() == 5);
  std::filesystem::remove_all(dir);
}
