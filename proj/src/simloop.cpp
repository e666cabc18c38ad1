#include "uadrive/simloop.hpp"

#include <json.hpp>

#include <cmath>
#include <iomanip>
#include <memory>
#include <sstream>

#include "uadrive/bnn.hpp"
#include "uadrive/error.hpp"
#include "uadrive/mlp.hpp"
#include "uadrive/textio.hpp"

namespace uadrive::sim {

using supervisor::Authority;
using textio::format_exact;

std::string to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::Pid: return "pid";
    case ControllerKind::Dnn: return "dnn";
    case ControllerKind::Bnn: return "bnn";
  }
  return "?";
}

std::string to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::LapCompleted: return "LapCompleted";
    case Outcome::Crashed: return "Crashed";
    case Outcome::StepLimit: return "StepLimit";
  }
  return "?";
}

ControllerKind parse_controller(const std::string& text) {
  if (text == "pid") return ControllerKind::Pid;
  if (text == "dnn") return ControllerKind::Dnn;
  if (text == "bnn") return ControllerKind::Bnn;
  throw Error(ErrorCode::ConfigInvalid, "controller must be pid, dnn or bnn, got '" + text + "'");
}

Outcome parse_outcome(const std::string& text) {
  if (text == "LapCompleted") return Outcome::LapCompleted;
  if (text == "Crashed") return Outcome::Crashed;
  if (text == "StepLimit") return Outcome::StepLimit;
  throw Error(ErrorCode::MalformedRow, "unknown outcome '" + text + "'");
}

void EpisodeConfig::validate() const {
  vehicle.validate();
  lidar.validate();
  pid.validate();
  supervisor.validate();
  if (supervisor_enabled && controller != ControllerKind::Bnn) {
    throw Error(ErrorCode::ConfigInvalid, "the supervisor requires the bnn controller");
  }
  if (!(speed_mph > 0.0)) throw Error(ErrorCode::ConfigInvalid, "episode speed must be positive");
  if (max_steps < 0) throw Error(ErrorCode::ConfigInvalid, "max_steps must be at least 1 (0 selects the default)");
  if (pred_samples < 2) throw Error(ErrorCode::ConfigInvalid, "bnn.pred_samples must be at least 2");
  if (!(cov_floor > 0.0)) throw Error(ErrorCode::ConfigInvalid, "bnn.cov_floor must be positive");
}

long EpisodeConfig::resolved_max_steps(const track::Track& track) const {
  if (max_steps > 0) return max_steps;
  const double lap_steps = track.total_length() / (vehicle::mph_to_mps(speed_mph) * vehicle.dt);
  return static_cast<long>(std::ceil(10.0 * lap_steps));
}

EpisodeResult run_episode(const track::Track& track, const EpisodeConfig& cfg, const Models& models) {
  cfg.validate();
  std::unique_ptr<bnn::PosteriorEnsemble> ensemble;
  if (cfg.controller == ControllerKind::Dnn) {
    if (!models.dnn) throw Error(ErrorCode::MissingModel, "dnn controller needs a dnn checkpoint");
    if (models.dnn->arch.input_size() != static_cast<std::size_t>(cfg.lidar.n_rays)) {
      throw Error(ErrorCode::ConfigInvalid, "dnn input width differs from lidar.n_rays");
    }
  }
  if (cfg.controller == ControllerKind::Bnn) {
    if (!models.bnn) throw Error(ErrorCode::MissingModel, "bnn controller needs a bnn checkpoint");
    if (models.bnn->arch.input_size() != static_cast<std::size_t>(cfg.lidar.n_rays)) {
      throw Error(ErrorCode::ConfigInvalid, "bnn input width differs from lidar.n_rays");
    }
    ensemble = std::make_unique<bnn::PosteriorEnsemble>(models.bnn->arch, models.bnn->vp, cfg.pred_samples, cfg.seed);
  }

  vehicle::VehicleParams params = cfg.vehicle;
  params.target_speed = vehicle::mph_to_mps(cfg.speed_mph);
  const long max_steps = cfg.resolved_max_steps(track);

  EpisodeResult res;
  res.track = track.name();
  res.controller = cfg.controller;
  res.supervisor_enabled = cfg.supervisor_enabled;
  res.records.reserve(static_cast<std::size_t>(std::min<long>(max_steps, 1'000'000)));

  const auto& start = track.spec().start;
  vehicle::VehicleState state{start.x, start.y, start.heading, params.target_speed};
  auto where = track.project({state.x, state.y});
  track::ProgressTracker progress(track.total_length(), where.s);
  pid::PidState pstate;
  supervisor::SupervisorState sup;
  long odd_total = 0;
  long streak = 0;
  double std_sum = 0.0;

  for (long k = 1; k <= max_steps; ++k) {
    // The fallback runs every step so it is warm when authority changes.
    const auto expert = pid::pid_steer(cfg.pid, pstate, where, state, params.dt);
    pstate = expert.state;

    StepRecord rec;
    double steer = expert.cmd.steer();
    if (cfg.controller != ControllerKind::Pid) {
      const auto scan = lidar::scan(track, state, cfg.lidar);
      if (cfg.controller == ControllerKind::Dnn) {
        steer = nn::forward(models.dnn->arch, models.dnn->weights, scan.normalized);
      } else {
        const auto pd = ensemble->predict(scan.normalized, cfg.cov_floor);
        odd_total += pd.odd_count;
        std_sum += pd.std;
        streak = supervisor::is_beyond(pd.cov, cfg.supervisor) ? streak + 1 : 0;
        res.max_beyond_streak = std::max(res.max_beyond_streak, streak);
        rec.bnn = BnnStats{pd.mean, pd.std, pd.cov, pd.odd_count, odd_total};
        if (cfg.supervisor_enabled) sup = supervisor::update(sup, pd.cov, cfg.supervisor);
        steer = supervisor::authority(sup) == Authority::Autonomous ? pd.mean : expert.cmd.steer();
      }
    }
    const vehicle::ControlCommand cmd(steer);
    state = vehicle::step(state, cmd, params);
    where = track.project({state.x, state.y});

    rec.t = static_cast<double>(k) * params.dt;
    rec.x = state.x;
    rec.y = state.y;
    rec.heading = state.heading;
    rec.s = where.s;
    rec.offset = where.offset;
    rec.steer = cmd.steer();
    rec.mode = sup.mode;
    res.records.push_back(rec);
    res.steps = k;
    res.max_abs_offset = std::max(res.max_abs_offset, std::abs(where.offset));

    if (std::abs(where.offset) > 0.5 * track.width()) {
      res.outcome = Outcome::Crashed;
      break;
    }
    if (progress.update(where.s)) {
      res.outcome = Outcome::LapCompleted;
      break;
    }
  }
  res.lap_time = static_cast<double>(res.steps) * params.dt;
  res.interventions = sup.intervention_count;
  res.steps_in_manual = sup.steps_in_manual;
  if (cfg.controller == ControllerKind::Bnn && res.steps > 0) res.mean_std = std_sum / static_cast<double>(res.steps);
  return res;
}

// ---------------------------------------------------------------- output

std::string log_csv(const EpisodeResult& result) {
  std::string out = "t,x,y,heading,s,offset,steer,mean,std,cov,odd,odd_total,mode\n";
  out.reserve(result.records.size() * 200);
  for (const auto& r : result.records) {
    out += format_exact(r.t) + ',' + format_exact(r.x) + ',' + format_exact(r.y) + ',' + format_exact(r.heading) +
           ',' + format_exact(r.s) + ',' + format_exact(r.offset) + ',' + format_exact(r.steer) + ',';
    if (r.bnn) {
      out += format_exact(r.bnn->mean) + ',' + format_exact(r.bnn->std) + ',' + format_exact(r.bnn->cov) + ',' +
             std::to_string(r.bnn->odd) + ',' + std::to_string(r.bnn->odd_total) + ',';
    } else {
      out += ",,,,,";
    }
    out += supervisor::to_string(r.mode);
    out += '\n';
  }
  return out;
}

std::string summary_json(const EpisodeResult& result, const std::string& log_digest) {
  nlohmann::ordered_json j;
  j["track"] = result.track;
  j["controller"] = to_string(result.controller);
  j["supervisor"] = result.supervisor_enabled;
  j["outcome"] = to_string(result.outcome);
  j["steps"] = result.steps;
  j["lap_time"] = result.lap_time;
  j["interventions"] = result.interventions;
  j["steps_in_manual"] = result.steps_in_manual;
  j["max_abs_offset"] = result.max_abs_offset;
  j["max_beyond_streak"] = result.max_beyond_streak;
  j["mean_std"] = result.mean_std;
  j["log_digest"] = log_digest;
  return j.dump(2) + "\n";
}

std::string write_episode(const EpisodeResult& result, const std::filesystem::path& path) {
  const std::string log = log_csv(result);
  const std::string digest = textio::content_digest(log);
  textio::write_file(path, log);
  textio::write_file(path.string() + ".json", summary_json(result, digest));
  return digest;
}

// ---------------------------------------------------------------- suites

SuiteReport evaluate_suite(const std::vector<track::TrackSpec>& tracks, const EpisodeConfig& cfg, const Models& models,
                           const std::filesystem::path& log_dir) {
  SuiteReport report;
  for (const auto& spec : tracks) {
    SuiteRow row;
    row.track = spec.name;
    try {
      const auto track = track::compile_track(spec);
      auto result = run_episode(track, cfg, models);
      if (!log_dir.empty()) {
        row.log_path = log_dir / (spec.name + ".csv");
        write_episode(result, row.log_path);
      }
      result.records.clear();
      result.records.shrink_to_fit();
      row.result = std::move(result);
    } catch (const Error& e) {
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string SuiteReport::to_csv() const {
  std::string out = "track,outcome,lap_time,interventions,max_abs_offset,steps_in_manual,max_beyond_streak,error\n";
  for (const auto& row : rows) {
    out += row.track + ',';
    if (row.result) {
      const auto& r = *row.result;
      out += to_string(r.outcome) + ',' + textio::format_sig9(r.lap_time) + ',' + std::to_string(r.interventions) + ',' +
             textio::format_sig9(r.max_abs_offset) + ',' + std::to_string(r.steps_in_manual) + ',' +
             std::to_string(r.max_beyond_streak) + ',';
    } else {
      out += "Error,,,,,,";
    }
    // Messages may carry commas; quote them.
    if (!row.error.empty()) out += '"' + row.error + '"';
    out += '\n';
  }
  return out;
}

std::string SuiteReport::to_table() const {
  std::ostringstream out;
  out << std::left << std::setw(14) << "track" << std::setw(14) << "outcome" << std::right << std::setw(10)
      << "lap_time" << std::setw(15) << "interventions" << std::setw(16) << "max_abs_offset" << '\n';
  for (const auto& row : rows) {
    out << std::left << std::setw(14) << row.track;
    if (row.result) {
      const auto& r = *row.result;
      out << std::setw(14) << to_string(r.outcome) << std::right << std::fixed << std::setprecision(3)
          << std::setw(10) << r.lap_time << std::setw(15) << r.interventions << std::setw(16) << r.max_abs_offset;
      out.unsetf(std::ios::fixed);
    } else {
      out << "error: " << row.error;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace uadrive::sim
