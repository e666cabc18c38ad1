#include <cmath>
#include <numbers>

#include "uadrive/error.hpp"
#include "uadrive/track.hpp"

namespace uadrive::track {

namespace {

SegmentSpec S(double length) { return SegmentSpec::straight(length); }
SegmentSpec A(double radius, double sweep_deg) {
  return SegmentSpec::arc(radius, sweep_deg * std::numbers::pi / 180.0);
}

// Layouts are given with two placeholder straights whose lengths are solved
// so that the chain closes exactly.
TrackSpec make(std::string name, std::vector<SegmentSpec> segments, std::size_t free_a,
               std::size_t free_b) {
  TrackSpec spec{std::move(name), std::move(segments), 15.0, {}};
  if (!close_with_straights(spec, free_a, free_b)) {
    throw Error(ErrorCode::NonClosedLoop, "builtin layout '" + spec.name + "' cannot be closed");
  }
  return spec;
}

}  // namespace

bool close_with_straights(TrackSpec& spec, std::size_t first, std::size_t second) {
  if (first >= spec.segments.size() || second >= spec.segments.size() || first == second ||
      spec.segments[first].kind != SegmentKind::Straight ||
      spec.segments[second].kind != SegmentKind::Straight) {
    return false;
  }
  // Heading at the start of every segment does not depend on straight lengths.
  double heading = spec.start.heading;
  double ha = 0.0, hb = 0.0;
  for (std::size_t i = 0; i < spec.segments.size(); ++i) {
    if (i == first) ha = heading;
    if (i == second) hb = heading;
    if (spec.segments[i].kind == SegmentKind::Arc) heading += spec.segments[i].sweep;
  }
  TrackSpec probe = spec;
  probe.segments[first].length = 0.0;
  probe.segments[second].length = 0.0;
  const Pose2 end = chain_end_pose(probe);
  const Vec2 r{spec.start.x - end.x, spec.start.y - end.y};
  const Vec2 u = unit_from_angle(ha);
  const Vec2 v = unit_from_angle(hb);
  const double det = cross(u, v);
  if (std::abs(det) < 1e-9) return false;
  const double a = cross(r, v) / det;
  const double b = cross(u, r) / det;
  if (!(a > 0.0) || !(b > 0.0)) return false;
  spec.segments[first].length = a;
  spec.segments[second].length = b;
  return true;
}

std::vector<TrackSpec> builtin_tracks() {
  std::vector<TrackSpec> out;
  // ~3.15 km, radii 60..200 m, left and right bends.
  out.push_back(make("train-loop",
                     {S(0), A(150, 90), S(250), A(90, -50), A(70, 70), S(300), A(120, 80), S(150),
                      A(200, -40), A(100, 90), S(0), A(60, 60), S(120), A(80, -60), A(110, 120)},
                     0, 10));
  out.push_back(make("eval-a",
                     {S(0), A(100, 120), S(150), A(70, -45), A(130, 105), S(100), A(90, 90), S(0),
                      A(160, 90)},
                     0, 7));
  out.push_back(make("eval-b",
                     {S(0), A(80, 90), S(0), A(140, 60), A(75, -70), S(180), A(95, 110), S(100),
                      A(120, 75), S(520), A(65, 95)},
                     0, 2));
  out.push_back(make("eval-c",
                     {S(0), A(110, -60), A(85, 100), S(150), A(150, 90), S(0), A(70, 120), S(490),
                      A(100, 110)},
                     0, 5));
  // Two 15 m U-turns in opposite directions joined by a short straight.
  out.push_back(make("hairpin",
                     {S(0), A(60, 90), S(0), A(60, 90), S(100), A(15, -180), S(60), A(15, 180),
                      S(150), A(60, 90), S(200), A(60, 90)},
                     0, 2));
  return out;
}

std::optional<TrackSpec> find_builtin(const std::string& name) {
  for (auto& spec : builtin_tracks()) {
    if (spec.name == name) return spec;
  }
  return std::nullopt;
}

std::vector<std::string> builtin_names() {
  std::vector<std::string> names;
  for (const auto& spec : builtin_tracks()) names.push_back(spec.name);
  return names;
}

}  // namespace uadrive::track
