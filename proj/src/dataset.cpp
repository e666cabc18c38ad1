#include "uadrive/dataset.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "uadrive/error.hpp"
#include "uadrive/rng.hpp"
#include "uadrive/textio.hpp"

namespace uadrive::dataset {

using textio::format_sig9;

std::string Dataset::rows_text() const {
  std::string out;
  out.reserve(samples.size() * (meta.n_rays + 1) * 12);
  for (const auto& s : samples) {
    for (const double f : s.features) {
      out += format_sig9(f);
      out += ',';
    }
    out += format_sig9(s.label);
    out += '\n';
  }
  return out;
}

void Dataset::refresh_digest() { meta.digest = textio::content_digest(rows_text()); }

// ---------------------------------------------------------------- generate

Dataset generate(const track::Track& track, const pid::PidGains& gains, const GenerationConfig& config) {
  config.vehicle.validate();
  config.lidar.validate();
  gains.validate();
  if (config.laps_per_speed < 1 || config.record_every < 1 || config.noise_hold_steps < 1 ||
      !(config.steer_noise >= 0.0)) {
    throw Error(ErrorCode::ConfigInvalid, "generation needs laps >= 1, record_every >= 1, hold >= 1");
  }

  Dataset ds;
  ds.meta.track = track.name();
  ds.meta.n_rays = config.lidar.n_rays;
  ds.meta.max_range = config.lidar.max_range;
  ds.meta.speeds_mph = config.speeds_mph;
  ds.meta.seed = config.seed;

  const auto perturb_root = rng::stream_key(config.seed, rng::Stream::ExpertPerturbation);
  const auto& start = track.spec().start;

  for (std::size_t run = 0; run < config.speeds_mph.size(); ++run) {
    vehicle::VehicleParams params = config.vehicle;
    params.target_speed = vehicle::mph_to_mps(config.speeds_mph[run]);
    if (!(params.target_speed > 0.0)) {
      throw Error(ErrorCode::ConfigInvalid, "generation speeds must be positive");
    }
    const rng::CounterRng noise(rng::derive(perturb_root, run));

    vehicle::VehicleState state{start.x, start.y, start.heading, params.target_speed};
    pid::PidState pstate;
    auto where = track.project({state.x, state.y});
    track::ProgressTracker progress(track.total_length(), where.s);
    const double lap_steps = track.total_length() / (params.target_speed * params.dt);
    const auto step_budget = static_cast<long>(5.0 * lap_steps * config.laps_per_speed) + 1000;

    for (long k = 0;; ++k) {
      if (k >= step_budget) {
        throw Error(ErrorCode::ExpertCrashed, "expert made no lap progress on '" + track.name() + "'");
      }
      const auto out = pid::pid_steer(gains, pstate, where, state, params.dt);
      pstate = out.state;
      if (k % config.record_every == 0) {
        const auto scan = lidar::scan(track, state, config.lidar);
        Sample s;
        s.features.reserve(scan.normalized.size());
        for (const double v : scan.normalized) s.features.push_back(textio::quantize9(v));
        s.label = textio::quantize9(out.cmd.steer());
        ds.samples.push_back(std::move(s));
      }
      double executed = out.cmd.steer();
      if (config.steer_noise > 0.0) {
        executed += config.steer_noise * noise.normal(static_cast<std::uint64_t>(k / config.noise_hold_steps));
      }
      state = vehicle::step(state, vehicle::ControlCommand(executed), params);
      where = track.project({state.x, state.y});
      if (std::abs(where.offset) > 0.5 * track.width()) {
        throw Error(ErrorCode::ExpertCrashed,
                    "expert left track '" + track.name() + "' at " + format_sig9(config.speeds_mph[run]) + " mph");
      }
      if (progress.update(where.s) && progress.laps() >= config.laps_per_speed) break;
    }
  }
  ds.refresh_digest();
  return ds;
}

// ---------------------------------------------------------------- split / batches

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::ConfigInvalid, "train fraction must lie in (0, 1)");
  }
  const std::size_t n = ds.size();
  const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_fraction));
  if (n_train == 0 || n_train == n) {
    throw Error(ErrorCode::EmptySplit, "split of " + std::to_string(n) + " samples leaves a side empty");
  }
  const auto order = rng::permutation(n, rng::stream_key(seed, rng::Stream::Split));
  Dataset train, val;
  train.meta = ds.meta;
  val.meta = ds.meta;
  train.samples.reserve(n_train);
  val.samples.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_train ? train : val).samples.push_back(ds.samples[order[i]]);
  }
  train.refresh_digest();
  val.refresh_digest();
  return {std::move(train), std::move(val)};
}

std::vector<std::vector<std::size_t>> batches(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                                              std::uint64_t epoch) {
  if (batch_size < 1) throw Error(ErrorCode::ConfigInvalid, "batch size must be at least 1");
  const auto order = rng::permutation(n, rng::derive(rng::stream_key(seed, rng::Stream::Batches), epoch));
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < n; i += batch_size) {
    const std::size_t end = std::min(n, i + batch_size);
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i), order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

// ---------------------------------------------------------------- CSV

namespace {

std::string join_speeds(const std::vector<double>& speeds) {
  std::string out;
  for (std::size_t i = 0; i < speeds.size(); ++i) {
    if (i) out += ',';
    out += format_sig9(speeds[i]);
  }
  return out;
}

std::string column_header(int n_rays) {
  std::string out;
  for (int i = 0; i < n_rays; ++i) out += "d_" + std::to_string(i) + ",";
  return out + "steer";
}

}  // namespace

std::string to_csv(const Dataset& ds) {
  std::ostringstream out;
  out << "# n_rays=" << ds.meta.n_rays << '\n'
      << "# max_range=" << textio::format_decimal(ds.meta.max_range) << '\n'
      << "# track=" << ds.meta.track << '\n'
      << "# speeds=" << join_speeds(ds.meta.speeds_mph) << '\n'
      << "# seed=" << ds.meta.seed << '\n'
      << "# digest=" << textio::content_digest(ds.rows_text()) << '\n'
      << column_header(ds.meta.n_rays) << '\n'
      << ds.rows_text();
  return out.str();
}

void save(const Dataset& ds, const std::filesystem::path& path) { textio::write_file(path, to_csv(ds)); }

Dataset load(const std::filesystem::path& path) { return from_csv(textio::read_file(path)); }

Dataset from_csv(const std::string& text) {
  Dataset ds;
  std::map<std::string, std::string, std::less<>> header;
  std::string rows;
  bool saw_columns = false;
  std::size_t line_no = 0;

  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    if (line.front() == '#') {
      const auto body = textio::trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      header[std::string(textio::trim(body.substr(0, eq)))] = std::string(textio::trim(body.substr(eq + 1)));
      continue;
    }

    if (!saw_columns) {
      for (const char* key : {"n_rays", "max_range", "track", "speeds", "seed", "digest"}) {
        if (!header.contains(key)) {
          throw Error(ErrorCode::MalformedRow, std::string("dataset header lacks '") + key + "'");
        }
      }
      ds.meta.n_rays = static_cast<int>(textio::parse_int(header["n_rays"]));
      ds.meta.max_range = textio::parse_double(header["max_range"]);
      ds.meta.track = header["track"];
      for (const auto part : textio::split(header["speeds"], ',')) {
        if (!textio::trim(part).empty()) ds.meta.speeds_mph.push_back(textio::parse_double(part));
      }
      ds.meta.seed = static_cast<std::uint64_t>(std::stoull(header["seed"]));
      ds.meta.digest = header["digest"];
      if (ds.meta.n_rays < 1) throw Error(ErrorCode::MalformedRow, "n_rays must be positive");
      if (line != column_header(ds.meta.n_rays)) {
        throw Error(ErrorCode::MalformedRow, "column header does not match n_rays=" + header["n_rays"]);
      }
      saw_columns = true;
      continue;
    }

    const auto cells = textio::split(line, ',');
    if (cells.size() != static_cast<std::size_t>(ds.meta.n_rays) + 1) {
      throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": expected " +
                                               std::to_string(ds.meta.n_rays + 1) + " columns, got " +
                                               std::to_string(cells.size()));
    }
    Sample s;
    s.features.reserve(ds.meta.n_rays);
    for (int i = 0; i < ds.meta.n_rays; ++i) {
      const double v = textio::parse_double(cells[i]);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": feature outside [0, 1]");
      }
      s.features.push_back(v);
    }
    s.label = textio::parse_double(cells.back());
    if (!(s.label >= -1.0 && s.label <= 1.0)) {
      throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": label outside [-1, 1]");
    }
    ds.samples.push_back(std::move(s));
    rows.append(line);
    rows += '\n';
  }
  if (!saw_columns) throw Error(ErrorCode::MalformedRow, "dataset has no column header");

  const auto digest = textio::content_digest(rows);
  if (digest != ds.meta.digest) {
    throw Error(ErrorCode::DigestMismatch, "dataset digest " + ds.meta.digest + " does not match rows (" + digest + ")");
  }
  return ds;
}

}  // namespace uadrive::dataset
