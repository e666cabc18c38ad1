#include "uadrive/config.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "uadrive/error.hpp"
#include "uadrive/textio.hpp"

namespace uadrive::config {

namespace {

using textio::format_sig9;

constexpr double kDeg = std::numbers::pi / 180.0;

[[noreturn]] void invalid(const std::string& key, const std::string& what) {
  throw Error(ErrorCode::ConfigInvalid, "'" + key + "': " + what);
}

double to_double(const std::string& key, std::string_view v) {
  try {
    return textio::parse_double(textio::trim(v));
  } catch (const Error&) {
    invalid(key, "expected a number, got '" + std::string(v) + "'");
  }
}

long long to_int(const std::string& key, std::string_view v) {
  try {
    return textio::parse_int(textio::trim(v));
  } catch (const Error&) {
    invalid(key, "expected an integer, got '" + std::string(v) + "'");
  }
}

std::vector<double> to_doubles(const std::string& key, std::string_view v) {
  std::vector<double> out;
  for (const auto part : textio::split(v, ',')) out.push_back(to_double(key, part));
  return out;
}

std::vector<std::string> to_names(std::string_view v) {
  std::vector<std::string> out;
  for (const auto part : textio::split(v, ',')) {
    const auto name = textio::trim(part);
    if (!name.empty()) out.emplace_back(name);
  }
  return out;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_same_v<T, std::string>) {
      out += values[i];
    } else if constexpr (std::is_integral_v<T>) {
      out += std::to_string(values[i]);
    } else {
      out += format_sig9(values[i]);
    }
  }
  return out;
}

struct Field {
  const char* key;
  std::function<void(ExperimentConfig&, const std::string&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <typename Member>
Field real(const char* key, Member member, double scale = 1.0) {
  return {key,
          [member, scale](ExperimentConfig& c, const std::string& k, std::string_view v) {
            std::invoke(member, c) = to_double(k, v) * scale;
          },
          [member, scale](const ExperimentConfig& c) { return format_sig9(std::invoke(member, c) / scale); }};
}

template <typename Member>
Field integer(const char* key, Member member) {
  return {key,
          [member](ExperimentConfig& c, const std::string& k, std::string_view v) {
            using T = std::remove_reference_t<decltype(std::invoke(member, c))>;
            std::invoke(member, c) = static_cast<T>(to_int(k, v));
          },
          [member](const ExperimentConfig& c) { return std::to_string(std::invoke(member, c)); }};
}

#define UADRIVE_REF(path) [](auto& c) -> auto& { return c.path; }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"seed",
       [](ExperimentConfig& c, const std::string& k, std::string_view v) {
         const auto s = to_int(k, v);
         if (s < 0) invalid(k, "must be non-negative");
         c.seed = static_cast<std::uint64_t>(s);
       },
       [](const ExperimentConfig& c) { return std::to_string(c.seed); }},
      {"out_dir", [](ExperimentConfig& c, const std::string&, std::string_view v) { c.out_dir = textio::trim(v); },
       [](const ExperimentConfig& c) { return c.out_dir; }},
      {"tracks.train",
       [](ExperimentConfig& c, const std::string&, std::string_view v) { c.train_track = textio::trim(v); },
       [](const ExperimentConfig& c) { return c.train_track; }},
      {"tracks.eval", [](ExperimentConfig& c, const std::string&, std::string_view v) { c.eval_tracks = to_names(v); },
       [](const ExperimentConfig& c) { return join(c.eval_tracks); }},

      real("vehicle.wheelbase", UADRIVE_REF(vehicle.wheelbase)),
      real("vehicle.max_steer_deg", UADRIVE_REF(vehicle.max_steer_angle), kDeg),
      real("vehicle.dt", UADRIVE_REF(vehicle.dt)),
      real("vehicle.speed_mph", UADRIVE_REF(speed_mph)),

      integer("lidar.n_rays", UADRIVE_REF(lidar.n_rays)),
      real("lidar.fov_deg", UADRIVE_REF(lidar.fov), kDeg),
      real("lidar.max_range", UADRIVE_REF(lidar.max_range)),

      real("pid.kp", UADRIVE_REF(pid.kp)),
      real("pid.ki", UADRIVE_REF(pid.ki)),
      real("pid.kd", UADRIVE_REF(pid.kd)),
      real("pid.k_heading", UADRIVE_REF(pid.k_heading)),
      real("pid.integral_limit", UADRIVE_REF(pid.integral_limit)),

      {"dataset.speeds_mph",
       [](ExperimentConfig& c, const std::string& k, std::string_view v) { c.gen_speeds_mph = to_doubles(k, v); },
       [](const ExperimentConfig& c) { return join(c.gen_speeds_mph); }},
      integer("dataset.laps", UADRIVE_REF(gen_laps)),
      integer("dataset.record_every", UADRIVE_REF(gen_record_every)),
      real("dataset.steer_noise", UADRIVE_REF(gen_steer_noise)),
      integer("dataset.noise_hold", UADRIVE_REF(gen_noise_hold)),
      real("dataset.train_fraction", UADRIVE_REF(train_fraction)),

      {"nn.hidden",
       [](ExperimentConfig& c, const std::string& k, std::string_view v) {
         c.hidden_sizes.clear();
         for (const auto part : textio::split(v, ',')) c.hidden_sizes.push_back(static_cast<int>(to_int(k, part)));
       },
       [](const ExperimentConfig& c) { return join(c.hidden_sizes); }},
      integer("train.max_epochs", UADRIVE_REF(train.max_epochs)),
      integer("train.batch_size", UADRIVE_REF(train.batch_size)),
      real("train.learning_rate", UADRIVE_REF(train.adam.learning_rate)),
      real("train.beta1", UADRIVE_REF(train.adam.beta1)),
      real("train.beta2", UADRIVE_REF(train.adam.beta2)),
      real("train.epsilon", UADRIVE_REF(train.adam.epsilon)),
      integer("train.patience", UADRIVE_REF(train.patience)),

      real("bnn.prior_sigma", UADRIVE_REF(prior.sigma)),
      real("bnn.noise_sigma", UADRIVE_REF(like.noise_sigma)),
      integer("bnn.mc_samples", UADRIVE_REF(mc_samples)),
      integer("bnn.pred_samples", UADRIVE_REF(pred_samples)),
      real("bnn.init_sigma_ratio", UADRIVE_REF(init_sigma_ratio)),
      real("bnn.cov_floor", UADRIVE_REF(cov_floor)),

      real("supervisor.cov_threshold", UADRIVE_REF(supervisor.cov_threshold)),
      integer("supervisor.consecutive", UADRIVE_REF(supervisor.required_consecutive)),
      integer("episode.max_steps", UADRIVE_REF(max_steps)),
  };
  return table;
}

#undef UADRIVE_REF

track::TrackSpec& custom_track(ExperimentConfig& cfg, const std::string& name) {
  for (auto& t : cfg.custom_tracks) {
    if (t.name == name) return t;
  }
  track::TrackSpec spec;
  spec.name = name;
  cfg.custom_tracks.push_back(spec);
  return cfg.custom_tracks.back();
}

void apply_track_key(ExperimentConfig& cfg, const std::string& key, std::string_view value) {
  // track.<name>.<field>
  const auto rest = std::string_view(key).substr(6);
  const auto dot = rest.rfind('.');
  if (dot == std::string_view::npos || dot == 0) invalid(key, "expected track.<name>.<field>");
  const std::string name(rest.substr(0, dot));
  const auto field = rest.substr(dot + 1);
  if (field == "width") {
    custom_track(cfg, name).width = to_double(key, value);
  } else if (field == "start") {
    const auto v = to_doubles(key, value);
    if (v.size() != 3) invalid(key, "expected x,y,heading");
    custom_track(cfg, name).start = {v[0], v[1], v[2] * kDeg};
  } else if (field == "segment") {
    std::vector<std::string_view> words;
    for (const auto w : textio::split(textio::trim(value), ' ')) {
      if (!w.empty()) words.push_back(w);
    }
    if (words.size() == 2 && words[0] == "straight") {
      custom_track(cfg, name).segments.push_back(track::SegmentSpec::straight(to_double(key, words[1])));
    } else if (words.size() == 3 && words[0] == "arc") {
      custom_track(cfg, name).segments.push_back(
          track::SegmentSpec::arc(to_double(key, words[1]), to_double(key, words[2]) * kDeg));
    } else {
      invalid(key, "expected 'straight <length>' or 'arc <radius> <sweep>'");
    }
  } else {
    invalid(key, "unknown track field '" + std::string(field) + "'");
  }
}

}  // namespace

void apply(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (key.starts_with("track.")) {
    apply_track_key(cfg, key, value);
    return;
  }
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(cfg, key, value);
      return;
    }
  }
  throw Error(ErrorCode::ConfigInvalid, "unknown config key '" + key + "'");
}

void apply_assignment(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw Error(ErrorCode::ConfigInvalid, "expected key=value, got '" + assignment + "'");
  apply(cfg, std::string(textio::trim(std::string_view(assignment).substr(0, eq))),
        std::string(textio::trim(std::string_view(assignment).substr(eq + 1))));
}

ExperimentConfig parse(const std::string& text) {
  ExperimentConfig cfg;
  std::size_t line_no = 0;
  for (const auto raw : textio::split(text, '\n')) {
    ++line_no;
    auto line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = textio::trim(line);
    if (line.empty()) continue;
    try {
      apply_assignment(cfg, std::string(line));
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigInvalid, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::ConfigInvalid, "config file '" + path.string() + "' does not exist");
  }
  return parse(textio::read_file(path));
}

std::vector<std::string> known_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.emplace_back(f.key);
  return keys;
}

// ---------------------------------------------------------------- views

void ExperimentConfig::validate() const {
  vehicle.validate();
  lidar.validate();
  pid.validate();
  supervisor.validate();
  if (!(speed_mph > 0.0)) throw Error(ErrorCode::ConfigInvalid, "vehicle.speed_mph must be positive");
  if (gen_speeds_mph.empty()) throw Error(ErrorCode::ConfigInvalid, "dataset.speeds_mph must not be empty");
  for (const double s : gen_speeds_mph) {
    if (!(s > 0.0)) throw Error(ErrorCode::ConfigInvalid, "dataset.speeds_mph must be positive");
  }
  if (gen_laps < 1 || gen_record_every < 1 || gen_noise_hold < 1) {
    throw Error(ErrorCode::ConfigInvalid, "dataset.laps, record_every and noise_hold must be at least 1");
  }
  if (!(gen_steer_noise >= 0.0)) throw Error(ErrorCode::ConfigInvalid, "dataset.steer_noise must be non-negative");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::ConfigInvalid, "dataset.train_fraction must lie in (0, 1)");
  }
  arch().validate();
  train_hyper().validate();
  bnn_hyper().validate();
  if (!(prior.sigma > 0.0) || !(like.noise_sigma > 0.0)) {
    throw Error(ErrorCode::ConfigInvalid, "bnn.prior_sigma and bnn.noise_sigma must be positive");
  }
  if (!(cov_floor > 0.0)) throw Error(ErrorCode::ConfigInvalid, "bnn.cov_floor must be positive");
  if (max_steps < 0) throw Error(ErrorCode::ConfigInvalid, "episode.max_steps must be non-negative");
  for (const auto& t : custom_tracks) {
    if (t.segments.empty()) throw Error(ErrorCode::ConfigInvalid, "track '" + t.name + "' has no segments");
  }
}

std::vector<std::string> ExperimentConfig::track_names() const {
  auto names = track::builtin_names();
  for (const auto& t : custom_tracks) {
    if (std::find(names.begin(), names.end(), t.name) == names.end()) names.push_back(t.name);
  }
  return names;
}

track::TrackSpec ExperimentConfig::resolve_track(const std::string& name) const {
  for (const auto& t : custom_tracks) {
    if (t.name == name) return t;
  }
  if (auto spec = track::find_builtin(name)) return *spec;
  std::string valid;
  for (const auto& n : track_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw Error(ErrorCode::ConfigInvalid, "unknown track '" + name + "' (valid tracks: " + valid + ")");
}

nn::MlpArchitecture ExperimentConfig::arch() const {
  nn::MlpArchitecture a;
  a.layer_sizes.push_back(lidar.n_rays);
  a.layer_sizes.insert(a.layer_sizes.end(), hidden_sizes.begin(), hidden_sizes.end());
  a.layer_sizes.push_back(1);
  return a;
}

dataset::GenerationConfig ExperimentConfig::generation() const {
  dataset::GenerationConfig g;
  g.speeds_mph = gen_speeds_mph;
  g.laps_per_speed = gen_laps;
  g.record_every = gen_record_every;
  g.seed = seed;
  g.steer_noise = gen_steer_noise;
  g.noise_hold_steps = gen_noise_hold;
  g.vehicle = vehicle;
  g.lidar = lidar;
  return g;
}

nn::TrainHyper ExperimentConfig::train_hyper() const {
  nn::TrainHyper h = train;
  h.seed = seed;
  return h;
}

bnn::BnnHyper ExperimentConfig::bnn_hyper() const {
  bnn::BnnHyper h;
  h.train = train_hyper();
  h.mc_samples = mc_samples;
  h.pred_samples = pred_samples;
  h.init_sigma_ratio = init_sigma_ratio;
  return h;
}

sim::EpisodeConfig ExperimentConfig::episode(sim::ControllerKind controller, bool supervisor_enabled) const {
  sim::EpisodeConfig e;
  e.controller = controller;
  e.supervisor_enabled = supervisor_enabled;
  e.speed_mph = speed_mph;
  e.max_steps = max_steps;
  e.seed = seed;
  e.vehicle = vehicle;
  e.lidar = lidar;
  e.pid = pid;
  e.supervisor = supervisor;
  e.pred_samples = pred_samples;
  e.cov_floor = cov_floor;
  return e;
}

std::string ExperimentConfig::canonical_text() const {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(*this) + "\n";
  for (const auto& t : custom_tracks) {
    const std::string p = "track." + t.name + ".";
    out += p + "width = " + format_sig9(t.width) + "\n";
    out += p + "start = " + format_sig9(t.start.x) + "," + format_sig9(t.start.y) + "," +
           format_sig9(t.start.heading / kDeg) + "\n";
    for (const auto& s : t.segments) {
      if (s.kind == track::SegmentKind::Straight) {
        out += p + "segment = straight " + format_sig9(s.length) + "\n";
      } else {
        out += p + "segment = arc " + format_sig9(s.radius) + " " + format_sig9(s.sweep / kDeg) + "\n";
      }
    }
  }
  return out;
}

std::string ExperimentConfig::digest() const { return textio::content_digest(canonical_text()); }

}  // namespace uadrive::config
