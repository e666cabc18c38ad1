#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace uadrive {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double k, Vec2 a) { return {k * a.x, k * a.y}; }
  friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline Vec2 unit_from_angle(double angle) { return {std::cos(angle), std::sin(angle)}; }

/// Wraps an angle into (-pi, pi].
double normalize_angle(double angle);

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
};

namespace track {

enum class SegmentKind { Straight, Arc };

/// One piece of a track centerline. Arcs turn left for positive sweep.
struct SegmentSpec {
  SegmentKind kind = SegmentKind::Straight;
  double length = 0.0;  // Straight only
  double radius = 0.0;  // Arc only
  double sweep = 0.0;   // Arc only, radians

  static SegmentSpec straight(double length) { return {SegmentKind::Straight, length, 0.0, 0.0}; }
  static SegmentSpec arc(double radius, double sweep) { return {SegmentKind::Arc, 0.0, radius, sweep}; }

  double arc_length() const {
    return kind == SegmentKind::Straight ? length : radius * std::abs(sweep);
  }
};

struct TrackSpec {
  std::string name;
  std::vector<SegmentSpec> segments;
  double width = 15.0;
  Pose2 start;
};

inline constexpr double kClosurePositionTol = 0.01;
inline constexpr double kClosureHeadingTol = 1e-4;
inline constexpr double kMaxSampleSpacing = 0.5;

/// A centerline vertex. Heading is the exact tangent of the underlying segment.
struct CenterSample {
  Vec2 p;
  double s = 0.0;
  double heading = 0.0;
  double curvature = 0.0;
};

/// Result of projecting a point onto the centerline.
struct Projection {
  double offset = 0.0;           // signed, positive left of the tangent
  double s = 0.0;                // arclength in [0, total_length)
  double tangent_heading = 0.0;  // centerline heading at the projection
  Vec2 foot;                     // closest centerline point
};

/// Bucketed index over 2D segments or points, used by the nearest-sample and
/// ray queries. Cells hold indices of every item whose bounding box touches them.
class UniformGrid {
 public:
  UniformGrid() = default;
  UniformGrid(double min_x, double min_y, double max_x, double max_y, double cell);

  void insert_segment(std::uint32_t id, Vec2 a, Vec2 b);
  void insert_point(std::uint32_t id, Vec2 p);

  int cols() const { return cols_; }
  int rows() const { return rows_; }
  double cell() const { return cell_; }
  double min_x() const { return min_x_; }
  double min_y() const { return min_y_; }
  bool in_bounds(int cx, int cy) const { return cx >= 0 && cy >= 0 && cx < cols_ && cy < rows_; }
  int cell_x(double x) const;
  int cell_y(double y) const;
  std::span<const std::uint32_t> items(int cx, int cy) const;

 private:
  double min_x_ = 0.0, min_y_ = 0.0, cell_ = 1.0;
  int cols_ = 0, rows_ = 0;
  std::vector<std::vector<std::uint32_t>> cells_;
};

/// A compiled, immutable track. Safe for concurrent reads.
class Track {
 public:
  const TrackSpec& spec() const { return spec_; }
  const std::string& name() const { return spec_.name; }
  double width() const { return spec_.width; }
  double total_length() const { return total_length_; }

  std::span<const CenterSample> centerline() const { return centerline_; }
  std::span<const Vec2> left_boundary() const { return left_; }
  std::span<const Vec2> right_boundary() const { return right_; }

  /// Signed lateral offset and lap coordinate of the closest centerline point.
  Projection project(Vec2 position) const;
  bool contains(Vec2 position) const;
  /// Nearest boundary hit along origin + t * direction, clipped to max_range.
  /// Throws Error(OriginOutsideTrack) when the origin is off the corridor.
  double ray_cast(Vec2 origin, Vec2 direction, double max_range) const;
  /// ray_cast without the containment check; the caller guarantees the origin.
  double ray_cast_inside(Vec2 origin, Vec2 direction, double max_range) const;
  /// Point on the centerline polyline at arclength s (wrapped).
  Vec2 point_at(double s) const;
  double min_arc_radius() const;

  friend Track compile_track(const TrackSpec& spec);

 private:
  std::size_t nearest_sample(Vec2 q) const;

  TrackSpec spec_;
  double total_length_ = 0.0;
  std::vector<CenterSample> centerline_;
  std::vector<Vec2> left_;
  std::vector<Vec2> right_;
  UniformGrid sample_grid_;
  UniformGrid wall_grid_;  // ids: left segments [0, n), right segments [n, 2n)
};

/// Compiles a segment chain into world geometry. Throws Error with
/// NonClosedLoop, DegenerateSegment or SelfIntersectingBoundary.
Track compile_track(const TrackSpec& spec);

/// End pose of the centerline chain before closure checking.
Pose2 chain_end_pose(const TrackSpec& spec);

/// Training, evaluation and hairpin layouts; all close and compile.
std::vector<TrackSpec> builtin_tracks();
std::optional<TrackSpec> find_builtin(const std::string& name);
std::vector<std::string> builtin_names();

/// Solves the lengths of two Straight segments (by index) so the chain closes
/// in position. Heading closure must already hold. Returns false when the
/// directions are parallel or a solved length is not positive.
bool close_with_straights(TrackSpec& spec, std::size_t first, std::size_t second);

/// Monotone lap-progress bookkeeping on top of wrapped arclength.
class ProgressTracker {
 public:
  ProgressTracker(double total_length, double initial_s);

  /// Feeds the latest arclength; returns true when this update completed a lap.
  bool update(double s);
  double progress() const { return progress_; }
  int laps() const { return laps_; }

  /// Fraction of the lap length that must be covered before a wrap counts.
  static constexpr double kMinLapFraction = 0.95;

 private:
  double total_;
  double prev_s_;
  double progress_ = 0.0;
  int laps_ = 0;
};

}  // namespace track
}  // namespace uadrive
