#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "uadrive/simloop.hpp"
#include "uadrive/track.hpp"

// Offline rendering of episode logs: aggregate tables and SVG plots.
namespace uadrive::report {

/// Parses an episode log. Throws Error(MalformedRow) on a wrong header, a bad
/// cell or timestamps that are not strictly increasing.
std::vector<sim::StepRecord> parse_log(const std::string& text);

struct LogSummary {
  std::string name;
  std::string track;    // from the sidecar, empty if absent
  std::string outcome;  // from the sidecar, empty if absent
  long steps = 0;
  double duration = 0.0;
  double max_abs_offset = 0.0;
  int interventions = 0;  // Autonomous -> Manual transitions in the log
  long manual_steps = 0;
  long odd_total = 0;
  double max_abs_cov = 0.0;
};

LogSummary summarize_log(const std::string& name, const std::vector<sim::StepRecord>& records);

/// Vehicle path over the track walls, Manual-mode steps drawn in a second colour.
std::string trajectory_svg(const std::vector<sim::StepRecord>& records, const track::Track* track);
/// Signed CoV against time with the +-threshold band.
std::string cov_svg(const std::vector<sim::StepRecord>& records, double threshold);

std::string summaries_csv(const std::vector<LogSummary>& rows);
std::string summaries_table(const std::vector<LogSummary>& rows);

/// Reads every `*.csv` episode log in logs_dir (sorted by name), writes
/// `<name>.trajectory.svg` and `<name>.cov.svg` per log plus `report.csv` and
/// `report.txt` into out_dir. Throws Error(MalformedRow) naming the bad log.
std::vector<LogSummary> build_report(const std::filesystem::path& logs_dir, const std::filesystem::path& out_dir,
                                     double cov_threshold);

}  // namespace uadrive::report
