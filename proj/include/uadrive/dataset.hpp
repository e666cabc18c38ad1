#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "uadrive/lidar.hpp"
#include "uadrive/pid.hpp"
#include "uadrive/track.hpp"
#include "uadrive/vehicle.hpp"

namespace uadrive::dataset {

/// Normalized LIDAR scan (right to left) and the expert steering label.
struct Sample {
  std::vector<double> features;
  double label = 0.0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct DatasetMeta {
  std::string track;
  int n_rays = 19;
  double max_range = 100.0;
  std::vector<double> speeds_mph;
  std::uint64_t seed = 0;
  std::string digest;  // git-style object id of the data rows
};

struct Dataset {
  DatasetMeta meta;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }

  /// Data rows exactly as written to disk (one line per sample).
  std::string rows_text() const;
  /// Recomputes meta.digest from the current samples.
  void refresh_digest();
};

struct GenerationConfig {
  std::vector<double> speeds_mph{50.0, 60.0, 70.0};
  int laps_per_speed = 2;
  int record_every = 25;
  std::uint64_t seed = 0;
  /// Executed steering = expert steering + a piecewise-constant disturbance
  /// with this standard deviation; the recorded label is the undisturbed
  /// expert output. Zero disables the disturbance.
  double steer_noise = 0.03;
  int noise_hold_steps = 100;
  vehicle::VehicleParams vehicle;  // target_speed is overridden per run
  lidar::LidarConfig lidar;
};

/// Runs the expert for laps_per_speed laps at every speed, recording one
/// sample every record_every steps. Throws Error(ExpertCrashed) when the
/// expert leaves the corridor or stops making progress.
Dataset generate(const track::Track& track, const pid::PidGains& gains, const GenerationConfig& config);

/// Seeded shuffle, then the first floor(n * fraction) samples form the train
/// side. Throws Error(EmptySplit) when either side would be empty.
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed);

void save(const Dataset& ds, const std::filesystem::path& path);
/// Throws Error(MalformedRow) on shape or range violations and
/// Error(DigestMismatch) when the header digest disagrees with the rows.
Dataset load(const std::filesystem::path& path);
std::string to_csv(const Dataset& ds);
Dataset from_csv(const std::string& text);

/// Per-epoch seeded permutation chopped into batches; the last may be short.
std::vector<std::vector<std::size_t>> batches(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                                              std::uint64_t epoch);

}  // namespace uadrive::dataset
