#include "uadrive/track.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "uadrive/error.hpp"

namespace uadrive {

double normalize_angle(double angle) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

namespace track {

namespace {

constexpr double kSampleCell = 5.0;
constexpr double kWallCell = 4.0;

// Pose reached after travelling u metres along seg from `from`.
Pose2 advance(const Pose2& from, const SegmentSpec& seg, double u) {
  if (seg.kind == SegmentKind::Straight) {
    return {from.x + u * std::cos(from.heading), from.y + u * std::sin(from.heading), from.heading};
  }
  const double side = seg.sweep > 0.0 ? 1.0 : -1.0;
  const double r = seg.radius;
  const double cx = from.x - side * r * std::sin(from.heading);
  const double cy = from.y + side * r * std::cos(from.heading);
  const double h = from.heading + side * u / r;
  return {cx + side * r * std::sin(h), cy - side * r * std::cos(h), h};
}

void validate(const TrackSpec& spec) {
  if (!(spec.width > 0.0) || !std::isfinite(spec.width)) {
    throw Error(ErrorCode::DegenerateSegment, "track '" + spec.name + "': width must be positive");
  }
  if (spec.segments.empty()) {
    throw Error(ErrorCode::DegenerateSegment, "track '" + spec.name + "' has no segments");
  }
  for (std::size_t i = 0; i < spec.segments.size(); ++i) {
    const auto& seg = spec.segments[i];
    const bool ok = seg.kind == SegmentKind::Straight
                        ? (seg.length > 0.0 && std::isfinite(seg.length))
                        : (seg.radius > 0.0 && std::isfinite(seg.radius) && seg.sweep != 0.0 &&
                           std::isfinite(seg.sweep));
    // An arc tighter than the half width folds its inner wall back over itself.
    if (ok && seg.kind == SegmentKind::Arc && seg.radius <= 0.5 * spec.width) {
      throw Error(ErrorCode::DegenerateSegment, "track '" + spec.name + "': segment " + std::to_string(i) +
                                                    " has radius below half the track width");
    }
    if (!ok) {
      throw Error(ErrorCode::DegenerateSegment,
                  "track '" + spec.name + "': segment " + std::to_string(i) + " is degenerate");
    }
  }
}

bool boxes_overlap(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  return std::max(std::min(a.x, b.x), std::min(c.x, d.x)) <= std::min(std::max(a.x, b.x), std::max(c.x, d.x)) &&
         std::max(std::min(a.y, b.y), std::min(c.y, d.y)) <= std::min(std::max(a.y, b.y), std::max(c.y, d.y));
}

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  if (!boxes_overlap(a, b, c, d)) return false;
  const double o1 = cross(b - a, c - a);
  const double o2 = cross(b - a, d - a);
  const double o3 = cross(d - c, a - c);
  const double o4 = cross(d - c, b - c);
  return ((o1 <= 0.0 && o2 >= 0.0) || (o1 >= 0.0 && o2 <= 0.0)) &&
         ((o3 <= 0.0 && o4 >= 0.0) || (o3 >= 0.0 && o4 <= 0.0));
}

void check_simple(const std::vector<Vec2>& poly, const UniformGrid& grid, std::uint32_t id_base,
                  const std::string& what) {
  const auto n = poly.size();
  std::vector<std::size_t> stamp(n, std::numeric_limits<std::size_t>::max());
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % n];
    const int x0 = grid.cell_x(std::min(a.x, b.x)), x1 = grid.cell_x(std::max(a.x, b.x));
    const int y0 = grid.cell_y(std::min(a.y, b.y)), y1 = grid.cell_y(std::max(a.y, b.y));
    for (int cy = y0; cy <= y1; ++cy) {
      for (int cx = x0; cx <= x1; ++cx) {
        for (const auto raw : grid.items(cx, cy)) {
          if (raw < id_base || raw >= id_base + n) continue;
          const std::size_t j = raw - id_base;
          if (j <= i || stamp[j] == i) continue;
          stamp[j] = i;
          if (j == i + 1 || (i == 0 && j == n - 1)) continue;
          if (segments_intersect(a, b, poly[j], poly[(j + 1) % n])) {
            throw Error(ErrorCode::SelfIntersectingBoundary,
                        what + " boundary crosses itself (segments " + std::to_string(i) + " and " +
                            std::to_string(j) + ")");
          }
        }
      }
    }
  }
}

}  // namespace

// ---------------------------------------------------------------- UniformGrid

UniformGrid::UniformGrid(double min_x, double min_y, double max_x, double max_y, double cell)
    : min_x_(min_x), min_y_(min_y), cell_(cell) {
  cols_ = std::max(1, static_cast<int>(std::ceil((max_x - min_x) / cell)));
  rows_ = std::max(1, static_cast<int>(std::ceil((max_y - min_y) / cell)));
  cells_.resize(static_cast<std::size_t>(cols_) * rows_);
}

int UniformGrid::cell_x(double x) const {
  return static_cast<int>(std::floor((x - min_x_) / cell_));
}

int UniformGrid::cell_y(double y) const {
  return static_cast<int>(std::floor((y - min_y_) / cell_));
}

std::span<const std::uint32_t> UniformGrid::items(int cx, int cy) const {
  if (!in_bounds(cx, cy)) return {};
  return cells_[static_cast<std::size_t>(cy) * cols_ + cx];
}

void UniformGrid::insert_segment(std::uint32_t id, Vec2 a, Vec2 b) {
  const int x0 = std::clamp(cell_x(std::min(a.x, b.x)), 0, cols_ - 1);
  const int x1 = std::clamp(cell_x(std::max(a.x, b.x)), 0, cols_ - 1);
  const int y0 = std::clamp(cell_y(std::min(a.y, b.y)), 0, rows_ - 1);
  const int y1 = std::clamp(cell_y(std::max(a.y, b.y)), 0, rows_ - 1);
  for (int cy = y0; cy <= y1; ++cy) {
    for (int cx = x0; cx <= x1; ++cx) {
      cells_[static_cast<std::size_t>(cy) * cols_ + cx].push_back(id);
    }
  }
}

void UniformGrid::insert_point(std::uint32_t id, Vec2 p) { insert_segment(id, p, p); }

// ---------------------------------------------------------------- compile

Pose2 chain_end_pose(const TrackSpec& spec) {
  Pose2 pose = spec.start;
  for (const auto& seg : spec.segments) {
    pose = advance(pose, seg, seg.arc_length());
  }
  return pose;
}

Track compile_track(const TrackSpec& spec) {
  validate(spec);

  Track t;
  t.spec_ = spec;

  Pose2 pose = spec.start;
  double s0 = 0.0;
  for (const auto& seg : spec.segments) {
    const double len = seg.arc_length();
    const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / kMaxSampleSpacing - 1e-9)));
    const double kappa = seg.kind == SegmentKind::Arc ? (seg.sweep > 0 ? 1.0 : -1.0) / seg.radius : 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double u = len * static_cast<double>(k) / static_cast<double>(n);
      const Pose2 p = advance(pose, seg, u);
      t.centerline_.push_back({{p.x, p.y}, s0 + u, p.heading, kappa});
    }
    pose = advance(pose, seg, len);
    s0 += len;
  }
  t.total_length_ = s0;

  const double dpos = std::hypot(pose.x - spec.start.x, pose.y - spec.start.y);
  const double dheading = std::abs(normalize_angle(pose.heading - spec.start.heading));
  if (dpos > kClosurePositionTol || dheading > kClosureHeadingTol) {
    throw Error(ErrorCode::NonClosedLoop, "track '" + spec.name + "' does not close: position residual " +
                                              std::to_string(dpos) + " m, heading residual " +
                                              std::to_string(dheading) + " rad");
  }

  const double half = 0.5 * spec.width;
  double min_x = std::numeric_limits<double>::infinity(), min_y = min_x;
  double max_x = -min_x, max_y = -min_x;
  t.left_.reserve(t.centerline_.size());
  t.right_.reserve(t.centerline_.size());
  for (auto& c : t.centerline_) {
    c.heading = normalize_angle(c.heading);
    const Vec2 normal{-std::sin(c.heading), std::cos(c.heading)};
    t.left_.push_back(c.p + half * normal);
    t.right_.push_back(c.p - half * normal);
    for (const Vec2 q : {t.left_.back(), t.right_.back()}) {
      min_x = std::min(min_x, q.x);
      min_y = std::min(min_y, q.y);
      max_x = std::max(max_x, q.x);
      max_y = std::max(max_y, q.y);
    }
  }

  const double pad = 1.0;
  t.sample_grid_ = UniformGrid(min_x - pad, min_y - pad, max_x + pad, max_y + pad, kSampleCell);
  for (std::uint32_t i = 0; i < t.centerline_.size(); ++i) {
    t.sample_grid_.insert_point(i, t.centerline_[i].p);
  }
  const auto n = static_cast<std::uint32_t>(t.left_.size());
  t.wall_grid_ = UniformGrid(min_x - pad, min_y - pad, max_x + pad, max_y + pad, kWallCell);
  for (std::uint32_t i = 0; i < n; ++i) {
    t.wall_grid_.insert_segment(i, t.left_[i], t.left_[(i + 1) % n]);
    t.wall_grid_.insert_segment(n + i, t.right_[i], t.right_[(i + 1) % n]);
  }

  check_simple(t.left_, t.wall_grid_, 0, "left");
  check_simple(t.right_, t.wall_grid_, n, "right");
  return t;
}

// ---------------------------------------------------------------- queries

std::size_t Track::nearest_sample(Vec2 q) const {
  const auto& g = sample_grid_;
  const int qx = g.cell_x(q.x);
  const int qy = g.cell_y(q.y);
  const int outside = std::max({-qx, -qy, qx - (g.cols() - 1), qy - (g.rows() - 1), 0});

  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  auto consider = [&](std::size_t i) {
    const Vec2 d = centerline_[i].p - q;
    const double d2 = dot(d, d);
    if (d2 < best_d2 || (d2 == best_d2 && i < best)) {
      best_d2 = d2;
      best = i;
    }
  };

  if (outside > 4) {
    for (std::size_t i = 0; i < centerline_.size(); ++i) consider(i);
    return best;
  }

  const int max_ring = std::max(g.cols(), g.rows()) + outside;
  for (int ring = 0; ring <= max_ring; ++ring) {
    for (int cy = qy - ring; cy <= qy + ring; ++cy) {
      const bool edge_row = (cy == qy - ring || cy == qy + ring);
      for (int cx = qx - ring; cx <= qx + ring; cx += (edge_row || ring == 0) ? 1 : 2 * ring) {
        for (const auto i : g.items(cx, cy)) consider(i);
      }
    }
    // Everything not yet visited lies at least ring * cell away.
    const double reach = ring * g.cell();
    if (best_d2 <= reach * reach) break;
  }
  return best;
}

Projection Track::project(Vec2 q) const {
  const std::size_t n = centerline_.size();
  const std::size_t i = nearest_sample(q);
  Projection best;
  double best_d = std::numeric_limits<double>::infinity();
  for (const std::size_t a : {(i + n - 1) % n, i}) {
    const std::size_t b = (a + 1) % n;
    const Vec2 pa = centerline_[a].p;
    const Vec2 pb = centerline_[b].p;
    const Vec2 e = pb - pa;
    const double len2 = dot(e, e);
    const double t = len2 > 0.0 ? std::clamp(dot(q - pa, e) / len2, 0.0, 1.0) : 0.0;
    const Vec2 foot = pa + t * e;
    const double d = norm(q - foot);
    if (d < best_d) {
      best_d = d;
      const double sb = (b == 0) ? total_length_ : centerline_[b].s;
      double s = centerline_[a].s + t * (sb - centerline_[a].s);
      if (s >= total_length_) s -= total_length_;
      const double side = cross(e, q - foot);
      best.offset = side > 0.0 ? d : (side < 0.0 ? -d : 0.0);
      best.s = s;
      best.tangent_heading = normalize_angle(
          centerline_[a].heading + t * normalize_angle(centerline_[b].heading - centerline_[a].heading));
      best.foot = foot;
    }
  }
  return best;
}

bool Track::contains(Vec2 position) const {
  return std::abs(project(position).offset) <= 0.5 * spec_.width;
}

double Track::ray_cast(Vec2 origin, Vec2 direction, double max_range) const {
  if (!contains(origin)) {
    throw Error(ErrorCode::OriginOutsideTrack, "ray origin lies outside track '" + spec_.name + "'");
  }
  return ray_cast_inside(origin, direction, max_range);
}

double Track::ray_cast_inside(Vec2 o, Vec2 d, double max_range) const {
  const double dn = norm(d);
  d = (1.0 / dn) * d;
  const auto& g = wall_grid_;
  const auto n = static_cast<std::uint32_t>(left_.size());

  const double fx = (o.x - g.min_x()) / g.cell();
  const double fy = (o.y - g.min_y()) / g.cell();
  int cx = static_cast<int>(std::floor(fx));
  int cy = static_cast<int>(std::floor(fy));
  const int step_x = d.x > 0 ? 1 : -1;
  const int step_y = d.y > 0 ? 1 : -1;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const double delta_x = d.x != 0.0 ? g.cell() / std::abs(d.x) : kInf;
  const double delta_y = d.y != 0.0 ? g.cell() / std::abs(d.y) : kInf;
  double next_x = d.x != 0.0 ? (d.x > 0 ? (cx + 1 - fx) : (fx - cx)) * delta_x : kInf;
  double next_y = d.y != 0.0 ? (d.y > 0 ? (cy + 1 - fy) : (fy - cy)) * delta_y : kInf;

  double best = kInf;
  while (g.in_bounds(cx, cy)) {
    for (const auto id : g.items(cx, cy)) {
      const std::uint32_t k = id < n ? id : id - n;
      const auto& poly = id < n ? left_ : right_;
      const Vec2 a = poly[k];
      const Vec2 e = poly[(k + 1) % n] - a;
      const double denom = cross(d, e);
      if (denom == 0.0) continue;
      const Vec2 w = a - o;
      const double t = cross(w, e) / denom;
      const double u = cross(w, d) / denom;
      if (t >= 0.0 && u >= 0.0 && u <= 1.0 && t < best) best = t;
    }
    const double cell_exit = std::min(next_x, next_y);
    if (best <= cell_exit || cell_exit >= max_range) break;
    if (next_x < next_y) {
      next_x += delta_x;
      cx += step_x;
    } else {
      next_y += delta_y;
      cy += step_y;
    }
  }
  return std::min(best, max_range);
}

Vec2 Track::point_at(double s) const {
  s = std::fmod(s, total_length_);
  if (s < 0.0) s += total_length_;
  const auto it = std::upper_bound(centerline_.begin(), centerline_.end(), s,
                                   [](double v, const CenterSample& c) { return v < c.s; });
  const std::size_t a = static_cast<std::size_t>(std::distance(centerline_.begin(), it)) - 1;
  const std::size_t b = (a + 1) % centerline_.size();
  const double sb = b == 0 ? total_length_ : centerline_[b].s;
  const double t = (s - centerline_[a].s) / (sb - centerline_[a].s);
  return centerline_[a].p + t * (centerline_[b].p - centerline_[a].p);
}

double Track::min_arc_radius() const {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& seg : spec_.segments) {
    if (seg.kind == SegmentKind::Arc) r = std::min(r, seg.radius);
  }
  return r;
}

// ---------------------------------------------------------------- progress

ProgressTracker::ProgressTracker(double total_length, double initial_s)
    : total_(total_length), prev_s_(initial_s) {}

bool ProgressTracker::update(double s) {
  double ds = s - prev_s_;
  bool wrapped = false;
  if (ds < -0.5 * total_) {
    ds += total_;
    wrapped = true;
  } else if (ds > 0.5 * total_) {
    ds -= total_;
  }
  progress_ += ds;
  prev_s_ = s;
  if (wrapped && progress_ >= (laps_ + kMinLapFraction) * total_) {
    ++laps_;
    return true;
  }
  return false;
}

}  // namespace track
}  // namespace uadrive
