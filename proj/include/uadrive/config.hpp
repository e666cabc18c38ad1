#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "uadrive/bnn.hpp"
#include "uadrive/dataset.hpp"
#include "uadrive/lidar.hpp"
#include "uadrive/mlp.hpp"
#include "uadrive/pid.hpp"
#include "uadrive/simloop.hpp"
#include "uadrive/supervisor.hpp"
#include "uadrive/track.hpp"
#include "uadrive/train.hpp"
#include "uadrive/vehicle.hpp"

// Experiment configuration: a flat `key = value` file with dotted keys.
// Every key has a default; unknown keys are rejected. Angles are in degrees.
//
// Custom tracks are declared with repeated keys under `track.<name>.`:
//   track.oval.width   = 15
//   track.oval.start   = 0,0,0          (x, y, heading)
//   track.oval.segment = straight 200
//   track.oval.segment = arc 60 180     (radius, sweep; positive turns left)
namespace uadrive::config {

/// Environment variable that replaces `out_dir` when set.
inline constexpr const char* kOutDirEnv = "UADRIVE_OUT";

struct ExperimentConfig {
  std::uint64_t seed = 42;
  std::string out_dir = "out";
  std::string train_track = "train-loop";
  std::vector<std::string> eval_tracks{"eval-a", "eval-b", "eval-c"};
  std::vector<track::TrackSpec> custom_tracks;

  vehicle::VehicleParams vehicle;
  double speed_mph = 60.0;
  lidar::LidarConfig lidar;
  pid::PidGains pid;

  std::vector<double> gen_speeds_mph{50.0, 60.0, 70.0};
  int gen_laps = 2;
  int gen_record_every = 25;
  double gen_steer_noise = 0.03;
  int gen_noise_hold = 100;
  double train_fraction = 0.9;

  std::vector<int> hidden_sizes{256, 128, 64, 32, 16};
  nn::TrainHyper train;  // seed comes from `seed`
  bnn::PriorSpec prior;
  bnn::LikelihoodSpec like;
  int mc_samples = 2;
  int pred_samples = 30;
  double init_sigma_ratio = 0.05;
  double cov_floor = bnn::kDefaultCovFloor;

  supervisor::SupervisorConfig supervisor;
  long max_steps = 0;

  /// Throws Error(ConfigInvalid).
  void validate() const;

  /// Custom tracks shadow builtins. Throws Error(ConfigInvalid) naming the valid tracks.
  track::TrackSpec resolve_track(const std::string& name) const;
  std::vector<std::string> track_names() const;

  nn::MlpArchitecture arch() const;
  dataset::GenerationConfig generation() const;
  nn::TrainHyper train_hyper() const;
  bnn::BnnHyper bnn_hyper() const;
  sim::EpisodeConfig episode(sim::ControllerKind controller, bool supervisor_enabled) const;

  /// Every key with its effective value, one per line, in a fixed order.
  std::string canonical_text() const;
  std::string digest() const;
};

/// Applies one `key=value` assignment. Throws Error(ConfigInvalid).
void apply(ExperimentConfig& cfg, const std::string& key, const std::string& value);
/// Parses "key=value".
void apply_assignment(ExperimentConfig& cfg, const std::string& assignment);

/// Defaults, then each line of `text`, then validation.
ExperimentConfig parse(const std::string& text);
ExperimentConfig load(const std::filesystem::path& path);

/// Every supported key except the per-track ones, in canonical order.
std::vector<std::string> known_keys();

}  // namespace uadrive::config
