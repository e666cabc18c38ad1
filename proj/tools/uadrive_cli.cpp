#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "uadrive/bnn.hpp"
#include "uadrive/checkpoint.hpp"
#include "uadrive/config.hpp"
#include "uadrive/dataset.hpp"
#include "uadrive/error.hpp"
#include "uadrive/report.hpp"
#include "uadrive/simloop.hpp"
#include "uadrive/textio.hpp"
#include "uadrive/train.hpp"

namespace fs = std::filesystem;
using namespace uadrive;

namespace {

struct Common {
  std::string config_path;
  std::optional<long long> seed;
  std::vector<std::string> overrides;
};

config::ExperimentConfig load_config(const Common& common) {
  config::ExperimentConfig cfg;
  if (!common.config_path.empty()) cfg = config::load(common.config_path);
  for (const auto& o : common.overrides) config::apply_assignment(cfg, o);
  if (common.seed) config::apply(cfg, "seed", std::to_string(*common.seed));
  if (const char* out = std::getenv(config::kOutDirEnv); out && *out) cfg.out_dir = out;
  cfg.validate();
  std::cout << "config_digest=" << cfg.digest() << "\n";
  return cfg;
}

bool parse_switch(const std::string& text) {
  if (text == "on") return true;
  if (text == "off") return false;
  throw Error(ErrorCode::ConfigInvalid, "--supervisor must be 'on' or 'off'");
}

// ---------------------------------------------------------------- commands

struct GenArgs {
  std::string track, out;
};

int cmd_gen_data(const Common& common, const GenArgs& args) {
  const auto cfg = load_config(common);
  const std::string name = args.track.empty() ? cfg.train_track : args.track;
  const auto track = track::compile_track(cfg.resolve_track(name));
  const fs::path out = args.out.empty() ? fs::path(cfg.out_dir) / "data" / (name + ".csv") : fs::path(args.out);
  const auto ds = dataset::generate(track, cfg.pid, cfg.generation());
  const auto text = dataset::to_csv(ds);
  textio::write_file(out, text);
  std::cout << "samples=" << ds.size() << " rows_digest=" << ds.meta.digest
            << " file_digest=" << textio::content_digest(text) << " path=" << out.string() << "\n";
  return 0;
}

struct TrainArgs {
  std::string model, data, out;
};

int cmd_train(const Common& common, const TrainArgs& args) {
  const auto cfg = load_config(common);
  const fs::path data =
      args.data.empty() ? fs::path(cfg.out_dir) / "data" / (cfg.train_track + ".csv") : fs::path(args.data);
  const fs::path out = args.out.empty() ? fs::path(cfg.out_dir) / "models" / (args.model + ".ckpt") : fs::path(args.out);
  if (!fs::exists(data)) throw Error(ErrorCode::Io, "dataset '" + data.string() + "' does not exist");
  const auto ds = dataset::load(data);
  const auto [train, val] = dataset::split(ds, cfg.train_fraction, cfg.seed);
  const auto arch = cfg.arch();
  std::cout << "train_size=" << train.size() << " val_size=" << val.size() << "\n";

  std::string history = "# model=" + args.model + "\n# train_size=" + std::to_string(train.size()) +
                        "\n# val_size=" + std::to_string(val.size()) + "\n";
  std::string text;
  int best_epoch = 0;
  double best_val = 0.0;
  if (args.model == "dnn") {
    const auto res = nn::train_dnn(train, val, arch, cfg.train_hyper());
    history += "epoch,train_mse,val_mse\n";
    for (const auto& r : res.history) {
      history += std::to_string(r.epoch) + "," + textio::format_sig9(r.train) + "," + textio::format_sig9(r.val) + "\n";
    }
    text = checkpoint::to_text(checkpoint::DnnCheckpoint{arch, res.weights, cfg.seed});
    best_epoch = res.best_epoch;
    best_val = res.best_val;
  } else {
    const auto res = bnn::train_bnn(train, val, arch, cfg.prior, cfg.like, cfg.bnn_hyper());
    history += "epoch,elbo,val_mse\n";
    for (const auto& r : res.history) {
      history += std::to_string(r.epoch) + "," + textio::format_sig9(r.train) + "," + textio::format_sig9(r.val) + "\n";
    }
    text = checkpoint::to_text(checkpoint::BnnCheckpoint{arch, res.vp, cfg.prior, cfg.like, cfg.seed});
    best_epoch = res.best_epoch;
    best_val = res.best_val;
  }
  textio::write_file(out, text);
  textio::write_file(out.string() + ".history.csv", history);
  std::cout << "best_epoch=" << best_epoch << " best_val_mse=" << textio::format_sig9(best_val)
            << " checkpoint_digest=" << textio::content_digest(text) << " path=" << out.string() << "\n";
  return 0;
}

struct LoadedModels {
  std::optional<checkpoint::DnnCheckpoint> dnn;
  std::optional<checkpoint::BnnCheckpoint> bnn;
  sim::ControllerKind kind = sim::ControllerKind::Pid;

  sim::Models view() const { return {dnn ? &*dnn : nullptr, bnn ? &*bnn : nullptr}; }
};

LoadedModels load_models(const std::string& model_file) {
  LoadedModels m;
  if (model_file.empty()) return m;
  if (checkpoint::peek_kind_file(model_file) == checkpoint::ModelKind::Dnn) {
    m.dnn = checkpoint::load_dnn(model_file);
    m.kind = sim::ControllerKind::Dnn;
  } else {
    m.bnn = checkpoint::load_bnn(model_file);
    m.kind = sim::ControllerKind::Bnn;
  }
  return m;
}

struct DriveArgs {
  std::string model_file, track, supervisor = "off", out;
};

int cmd_drive(const Common& common, const DriveArgs& args) {
  const auto cfg = load_config(common);
  const bool sup = parse_switch(args.supervisor);
  const auto models = load_models(args.model_file);
  const std::string name = args.track.empty() ? cfg.eval_tracks.at(0) : args.track;
  const auto track = track::compile_track(cfg.resolve_track(name));
  const auto ep = cfg.episode(models.kind, sup);
  ep.validate();
  const auto res = sim::run_episode(track, ep, models.view());
  const fs::path out = args.out.empty() ? fs::path(cfg.out_dir) / "episodes" /
                                              (name + "-" + sim::to_string(models.kind) + (sup ? "-sup" : "") + ".csv")
                                        : fs::path(args.out);
  const auto digest = sim::write_episode(res, out);
  std::cout << "outcome=" << sim::to_string(res.outcome) << " lap_time=" << textio::format_sig9(res.lap_time)
            << " interventions=" << res.interventions << " max_abs_offset=" << textio::format_sig9(res.max_abs_offset)
            << " log_digest=" << digest << " log=" << out.string() << "\n";
  switch (res.outcome) {
    case sim::Outcome::LapCompleted: return 0;
    case sim::Outcome::Crashed: return 3;
    case sim::Outcome::StepLimit: return 4;
  }
  return 1;
}

struct SuiteArgs {
  std::string model_file, tracks, supervisor = "off", out;
};

int cmd_eval_suite(const Common& common, const SuiteArgs& args) {
  const auto cfg = load_config(common);
  const bool sup = parse_switch(args.supervisor);
  const auto models = load_models(args.model_file);
  std::vector<std::string> names = cfg.eval_tracks;
  if (!args.tracks.empty()) {
    names.clear();
    for (const auto part : textio::split(args.tracks, ',')) {
      if (!textio::trim(part).empty()) names.emplace_back(textio::trim(part));
    }
  }
  std::vector<track::TrackSpec> specs;
  for (const auto& n : names) specs.push_back(cfg.resolve_track(n));
  const auto ep = cfg.episode(models.kind, sup);
  ep.validate();
  const fs::path out = args.out.empty() ? fs::path(cfg.out_dir) / "suite" : fs::path(args.out);
  const auto report = sim::evaluate_suite(specs, ep, models.view(), out / "logs");
  textio::write_file(out / "suite.csv", report.to_csv());
  textio::write_file(out / "suite.txt", report.to_table());
  std::cout << report.to_table();
  return 0;
}

struct ReportArgs {
  std::string logs, out;
};

int cmd_report(const Common& common, const ReportArgs& args) {
  const auto cfg = load_config(common);
  const fs::path out = args.out.empty() ? fs::path(args.logs) / "report" : fs::path(args.out);
  const auto rows = report::build_report(args.logs, out, cfg.supervisor.cov_threshold);
  std::cout << report::summaries_table(rows);
  return 0;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ExpertCrashed:
    case ErrorCode::Diverged:
      return 2;
    default:
      return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uncertainty-gated lateral control workbench"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--config", common.config_path, "Experiment config file (key = value)");
  app.add_option("--seed", common.seed, "Override the global seed");
  app.add_option("--set", common.overrides, "Override one config key, key=value (repeatable)");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate expert driving data on one track");
  gen_cmd->add_option("--track", gen.track, "Track name (default: tracks.train)");
  gen_cmd->add_option("--out", gen.out, "Dataset CSV path");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a dnn or bnn steering model");
  train_cmd->add_option("--model", tr.model, "dnn or bnn")->required()->check(CLI::IsMember({"dnn", "bnn"}));
  train_cmd->add_option("--data", tr.data, "Dataset CSV path");
  train_cmd->add_option("--out", tr.out, "Checkpoint path");

  DriveArgs dr;
  auto* drive_cmd = app.add_subcommand("drive", "Drive one closed-loop episode");
  drive_cmd->add_option("--model-file", dr.model_file, "Checkpoint (omit to drive with the PID expert)");
  drive_cmd->add_option("--track", dr.track, "Track name");
  drive_cmd->add_option("--supervisor", dr.supervisor, "on or off");
  drive_cmd->add_option("--out", dr.out, "Episode log path");

  SuiteArgs su;
  auto* suite_cmd = app.add_subcommand("eval-suite", "Drive one episode per track and tabulate");
  suite_cmd->add_option("--model-file", su.model_file, "Checkpoint (omit to drive with the PID expert)");
  suite_cmd->add_option("--tracks", su.tracks, "Comma-separated track names (default: tracks.eval)");
  suite_cmd->add_option("--supervisor", su.supervisor, "on or off");
  suite_cmd->add_option("--out", su.out, "Output directory");

  ReportArgs rp;
  auto* report_cmd = app.add_subcommand("report", "Render episode logs into tables and SVG plots");
  report_cmd->add_option("--logs", rp.logs, "Directory of episode logs")->required();
  report_cmd->add_option("--out", rp.out, "Output directory (default: <logs>/report)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_cmd) return cmd_gen_data(common, gen);
    if (*train_cmd) return cmd_train(common, tr);
    if (*drive_cmd) return cmd_drive(common, dr);
    if (*suite_cmd) return cmd_eval_suite(common, su);
    if (*report_cmd) return cmd_report(common, rp);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
