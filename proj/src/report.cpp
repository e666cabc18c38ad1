#include "uadrive/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "uadrive/error.hpp"
#include "uadrive/textio.hpp"

namespace uadrive::report {

namespace {

constexpr const char* kLogHeader = "t,x,y,heading,s,offset,steer,mean,std,cov,odd,odd_total,mode";

struct Frame {
  double min_x, min_y, scale, height;
  double px(double x) const { return 10.0 + (x - min_x) * scale; }
  double py(double y) const { return height - 10.0 - (y - min_y) * scale; }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

template <typename Points>
std::string polyline(const Points& pts, const Frame& f, const char* colour, double width, bool closed) {
  std::string out = closed ? "<polygon" : "<polyline";
  out += " fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"" + fmt(width) + "\" points=\"";
  for (const auto& p : pts) out += fmt(f.px(p.x)) + "," + fmt(f.py(p.y)) + " ";
  return out + "\"/>\n";
}

}  // namespace

std::vector<sim::StepRecord> parse_log(const std::string& text) {
  std::vector<sim::StepRecord> out;
  bool header = false;
  std::size_t line_no = 0;
  for (const auto raw : textio::split(text, '\n')) {
    ++line_no;
    auto line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header) {
      if (line != kLogHeader) throw Error(ErrorCode::MalformedRow, "episode log header is not '" + std::string(kLogHeader) + "'");
      header = true;
      continue;
    }
    const auto c = textio::split(line, ',');
    const auto where = "line " + std::to_string(line_no) + ": ";
    if (c.size() != 13) throw Error(ErrorCode::MalformedRow, where + "expected 13 columns");
    sim::StepRecord r;
    r.t = textio::parse_double(c[0]);
    r.x = textio::parse_double(c[1]);
    r.y = textio::parse_double(c[2]);
    r.heading = textio::parse_double(c[3]);
    r.s = textio::parse_double(c[4]);
    r.offset = textio::parse_double(c[5]);
    r.steer = textio::parse_double(c[6]);
    if (!c[7].empty()) {
      r.bnn = sim::BnnStats{textio::parse_double(c[7]), textio::parse_double(c[8]), textio::parse_double(c[9]),
                            static_cast<int>(textio::parse_int(c[10])), static_cast<long>(textio::parse_int(c[11]))};
    }
    if (c[12] == "autonomous") {
      r.mode = supervisor::Authority::Autonomous;
    } else if (c[12] == "manual") {
      r.mode = supervisor::Authority::Manual;
    } else {
      throw Error(ErrorCode::MalformedRow, where + "unknown mode '" + std::string(c[12]) + "'");
    }
    if (!out.empty() && !(r.t > out.back().t)) {
      throw Error(ErrorCode::MalformedRow, where + "timestamps are not strictly increasing");
    }
    out.push_back(r);
  }
  if (!header) throw Error(ErrorCode::MalformedRow, "episode log is empty");
  return out;
}

LogSummary summarize_log(const std::string& name, const std::vector<sim::StepRecord>& records) {
  LogSummary s;
  s.name = name;
  s.steps = static_cast<long>(records.size());
  auto prev = supervisor::Authority::Autonomous;
  for (const auto& r : records) {
    s.duration = r.t;
    s.max_abs_offset = std::max(s.max_abs_offset, std::abs(r.offset));
    if (r.mode == supervisor::Authority::Manual) {
      ++s.manual_steps;
      if (prev == supervisor::Authority::Autonomous) ++s.interventions;
    }
    prev = r.mode;
    if (r.bnn) {
      s.odd_total = r.bnn->odd_total;
      s.max_abs_cov = std::max(s.max_abs_cov, std::abs(r.bnn->cov));
    }
  }
  return s;
}

std::string trajectory_svg(const std::vector<sim::StepRecord>& records, const track::Track* track) {
  double min_x = 1e300, min_y = 1e300, max_x = -1e300, max_y = -1e300;
  auto grow = [&](double x, double y) {
    min_x = std::min(min_x, x);
    min_y = std::min(min_y, y);
    max_x = std::max(max_x, x);
    max_y = std::max(max_y, y);
  };
  for (const auto& r : records) grow(r.x, r.y);
  if (track) {
    for (const auto& p : track->left_boundary()) grow(p.x, p.y);
    for (const auto& p : track->right_boundary()) grow(p.x, p.y);
  }
  if (min_x > max_x) min_x = min_y = max_x = max_y = 0.0;
  const double span = std::max({max_x - min_x, max_y - min_y, 1.0});
  const double scale = 780.0 / span;
  Frame f{min_x, min_y, scale, (max_y - min_y) * scale + 20.0};
  const double w = (max_x - min_x) * scale + 20.0;

  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(w) + "\" height=\"" + fmt(f.height) +
                    "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (track) {
    out += polyline(track->left_boundary(), f, "#444", 1.0, true);
    out += polyline(track->right_boundary(), f, "#444", 1.0, true);
  }
  // Split the path into runs of equal mode.
  std::size_t i = 0;
  while (i < records.size()) {
    std::size_t j = i;
    while (j < records.size() && records[j].mode == records[i].mode) ++j;
    std::vector<Vec2> pts;
    for (std::size_t k = (i > 0 ? i - 1 : i); k < j; ++k) pts.push_back({records[k].x, records[k].y});
    const bool manual = records[i].mode == supervisor::Authority::Manual;
    out += polyline(pts, f, manual ? "#d62728" : "#1f77b4", manual ? 3.0 : 1.5, false);
    i = j;
  }
  return out + "</svg>\n";
}

std::string cov_svg(const std::vector<sim::StepRecord>& records, double threshold) {
  const double W = 900.0, H = 300.0, pad = 40.0;
  double t_max = records.empty() ? 1.0 : std::max(records.back().t, 1e-9);
  double c_max = 2.0 * threshold;
  for (const auto& r : records) {
    if (r.bnn && std::isfinite(r.bnn->cov)) c_max = std::max(c_max, std::abs(r.bnn->cov));
  }
  c_max = std::min(c_max, 50.0 * threshold);
  auto px = [&](double t) { return pad + (W - 2 * pad) * t / t_max; };
  auto py = [&](double c) { return H / 2 - (H / 2 - pad) * std::clamp(c, -c_max, c_max) / c_max; };

  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"900\" height=\"300\">\n"
                    "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // Manual spans as shaded bands.
  std::size_t i = 0;
  while (i < records.size()) {
    if (records[i].mode != supervisor::Authority::Manual) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < records.size() && records[j].mode == supervisor::Authority::Manual) ++j;
    const double x0 = px(i > 0 ? records[i - 1].t : 0.0);
    const double x1 = px(records[j - 1].t);
    out += "<rect x=\"" + fmt(x0) + "\" y=\"" + fmt(pad) + "\" width=\"" + fmt(std::max(x1 - x0, 1.0)) +
           "\" height=\"" + fmt(H - 2 * pad) + "\" fill=\"#f4cccc\"/>\n";
    i = j;
  }
  for (const double c : {threshold, -threshold}) {
    out += "<line x1=\"" + fmt(pad) + "\" x2=\"" + fmt(W - pad) + "\" y1=\"" + fmt(py(c)) + "\" y2=\"" + fmt(py(c)) +
           "\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";
  }
  out += "<line x1=\"" + fmt(pad) + "\" x2=\"" + fmt(W - pad) + "\" y1=\"" + fmt(py(0)) + "\" y2=\"" + fmt(py(0)) +
         "\" stroke=\"#ccc\"/>\n";
  // Decimate to at most ~2000 points.
  const std::size_t stride = std::max<std::size_t>(1, records.size() / 2000);
  out += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1\" points=\"";
  for (std::size_t k = 0; k < records.size(); k += stride) {
    const auto& r = records[k];
    if (!r.bnn || !std::isfinite(r.bnn->cov)) continue;
    out += fmt(px(r.t)) + "," + fmt(py(r.bnn->cov)) + " ";
  }
  out += "\"/>\n<text x=\"" + fmt(pad) + "\" y=\"20\" font-family=\"sans-serif\" font-size=\"12\">CoV (%) vs time (s), "
         "threshold +-" + textio::format_sig9(threshold) + "</text>\n";
  return out + "</svg>\n";
}

std::string summaries_csv(const std::vector<LogSummary>& rows) {
  std::string out = "log,track,outcome,steps,duration,max_abs_offset,interventions,manual_steps,odd_total,max_abs_cov\n";
  for (const auto& r : rows) {
    out += r.name + ',' + r.track + ',' + r.outcome + ',' + std::to_string(r.steps) + ',' +
           textio::format_sig9(r.duration) + ',' + textio::format_sig9(r.max_abs_offset) + ',' +
           std::to_string(r.interventions) + ',' + std::to_string(r.manual_steps) + ',' + std::to_string(r.odd_total) +
           ',' + textio::format_sig9(r.max_abs_cov) + '\n';
  }
  return out;
}

std::string summaries_table(const std::vector<LogSummary>& rows) {
  std::ostringstream out;
  out << std::left << std::setw(28) << "log" << std::setw(14) << "outcome" << std::right << std::setw(10) << "time"
      << std::setw(15) << "interventions" << std::setw(12) << "max|off|" << std::setw(12) << "max|cov|" << '\n';
  for (const auto& r : rows) {
    out << std::left << std::setw(28) << r.name << std::setw(14) << (r.outcome.empty() ? "-" : r.outcome)
        << std::right << std::fixed << std::setprecision(3) << std::setw(10) << r.duration << std::setw(15)
        << r.interventions << std::setw(12) << r.max_abs_offset << std::setw(12) << r.max_abs_cov << '\n';
  }
  return out.str();
}

std::vector<LogSummary> build_report(const std::filesystem::path& logs_dir, const std::filesystem::path& out_dir,
                                     double cov_threshold) {
  if (!std::filesystem::is_directory(logs_dir)) {
    throw Error(ErrorCode::Io, "log directory '" + logs_dir.string() + "' does not exist");
  }
  std::vector<std::filesystem::path> logs;
  for (const auto& entry : std::filesystem::directory_iterator(logs_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") logs.push_back(entry.path());
  }
  std::sort(logs.begin(), logs.end());

  std::vector<LogSummary> rows;
  for (const auto& path : logs) {
    std::vector<sim::StepRecord> records;
    try {
      records = parse_log(textio::read_file(path));
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedRow, path.filename().string() + ": " + e.what());
    }
    const auto stem = path.stem().string();
    auto summary = summarize_log(stem, records);
    std::optional<track::Track> track;
    const auto sidecar = path.string() + ".json";
    if (std::filesystem::exists(sidecar)) {
      const auto j = nlohmann::json::parse(textio::read_file(sidecar), nullptr, false);
      if (j.is_object()) {
        summary.track = j.value("track", "");
        summary.outcome = j.value("outcome", "");
        if (auto spec = track::find_builtin(summary.track)) track = track::compile_track(*spec);
      }
    }
    textio::write_file(out_dir / (stem + ".trajectory.svg"), trajectory_svg(records, track ? &*track : nullptr));
    textio::write_file(out_dir / (stem + ".cov.svg"), cov_svg(records, cov_threshold));
    rows.push_back(std::move(summary));
  }
  textio::write_file(out_dir / "report.csv", summaries_csv(rows));
  textio::write_file(out_dir / "report.txt", summaries_table(rows));
  return rows;
}

}  // namespace uadrive::report
