#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "uadrive/checkpoint.hpp"
#include "uadrive/lidar.hpp"
#include "uadrive/pid.hpp"
#include "uadrive/supervisor.hpp"
#include "uadrive/track.hpp"
#include "uadrive/vehicle.hpp"

// Closed-loop episodes: sense, predict, supervise, actuate, integrate.
namespace uadrive::sim {

enum class ControllerKind { Pid, Dnn, Bnn };
enum class Outcome { LapCompleted, Crashed, StepLimit };

std::string to_string(ControllerKind kind);
std::string to_string(Outcome outcome);
/// Throws Error(ConfigInvalid).
ControllerKind parse_controller(const std::string& text);
Outcome parse_outcome(const std::string& text);

struct EpisodeConfig {
  ControllerKind controller = ControllerKind::Pid;
  bool supervisor_enabled = false;
  double speed_mph = 60.0;
  long max_steps = 0;  // 0 selects 10x the expected lap steps
  std::uint64_t seed = 0;
  vehicle::VehicleParams vehicle;
  lidar::LidarConfig lidar;
  pid::PidGains pid;
  supervisor::SupervisorConfig supervisor;
  int pred_samples = 30;
  double cov_floor = 0.02;

  void validate() const;
  long resolved_max_steps(const track::Track& track) const;
};

/// Networks an episode may drive with; only the one the controller needs is read.
struct Models {
  const checkpoint::DnnCheckpoint* dnn = nullptr;
  const checkpoint::BnnCheckpoint* bnn = nullptr;
};

struct BnnStats {
  double mean = 0.0;
  double std = 0.0;
  double cov = 0.0;
  int odd = 0;
  long odd_total = 0;
};

/// State after the k-th step; t = k * dt.
struct StepRecord {
  double t = 0.0;
  double x = 0.0, y = 0.0, heading = 0.0;
  double s = 0.0;
  double offset = 0.0;
  double steer = 0.0;  // actuated
  std::optional<BnnStats> bnn;
  supervisor::Authority mode = supervisor::Authority::Autonomous;
};

struct EpisodeResult {
  std::string track;
  ControllerKind controller = ControllerKind::Pid;
  bool supervisor_enabled = false;
  Outcome outcome = Outcome::StepLimit;
  long steps = 0;
  double lap_time = 0.0;
  int interventions = 0;
  long steps_in_manual = 0;
  double max_abs_offset = 0.0;
  /// Longest run of consecutive steps with |CoV| beyond the supervisor threshold.
  long max_beyond_streak = 0;
  double mean_std = 0.0;
  std::vector<StepRecord> records;
};

/// Throws Error(MissingModel) when the controller's network is absent and
/// Error(ConfigInvalid) on an invalid configuration.
EpisodeResult run_episode(const track::Track& track, const EpisodeConfig& cfg, const Models& models);

/// Header plus one row per step, columns
/// t,x,y,heading,s,offset,steer,mean,std,cov,odd,odd_total,mode.
std::string log_csv(const EpisodeResult& result);
/// Summary document stored next to an episode log.
std::string summary_json(const EpisodeResult& result, const std::string& log_digest);
/// Writes `<path>` and `<path>.json`; returns the log digest.
std::string write_episode(const EpisodeResult& result, const std::filesystem::path& path);

struct SuiteRow {
  std::string track;
  std::optional<EpisodeResult> result;  // records dropped after writing
  std::string error;
  std::filesystem::path log_path;
};

struct SuiteReport {
  std::vector<SuiteRow> rows;

  std::string to_csv() const;
  std::string to_table() const;
};

/// One episode per track, in input order. Per-track errors are recorded in the
/// row and the suite continues. Logs go to `log_dir/<track>.csv` when log_dir is
/// not empty.
SuiteReport evaluate_suite(const std::vector<track::TrackSpec>& tracks, const EpisodeConfig& cfg, const Models& models,
                           const std::filesystem::path& log_dir);

}  // namespace uadrive::sim
