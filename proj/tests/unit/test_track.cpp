#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "support.hpp"
#include "uadrive/error.hpp"
#include "uadrive/rng.hpp"
#include "uadrive/track.hpp"

using namespace uadrive;
using namespace uadrive::track;
using std::numbers::pi;

namespace {

ErrorCode compile_error(const TrackSpec& spec) {
  try {
    compile_track(spec);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("compile_track did not throw");
  return ErrorCode::Io;
}

// Exhaustive ray / segment intersection over every wall segment.
double brute_force_ray(const Track& t, Vec2 o, Vec2 d, double max_range) {
  double best = max_range;
  auto scan = [&](std::span<const Vec2> wall) {
    for (std::size_t i = 0; i < wall.size(); ++i) {
      const Vec2 a = wall[i];
      const Vec2 b = wall[(i + 1) % wall.size()];
      const Vec2 e = b - a;
      const double den = cross(d, e);
      if (std::abs(den) < 1e-15) continue;
      const Vec2 ao = a - o;
      const double tt = cross(ao, e) / den;
      const double u = cross(ao, d) / den;
      if (tt >= 0.0 && u >= 0.0 && u <= 1.0) best = std::min(best, tt);
    }
  };
  scan(t.left_boundary());
  scan(t.right_boundary());
  return best;
}

}  // namespace

TEST_CASE("compile: closed shapes have the expected length") {
  const auto ring = compile_track(test_support::ring(100.0));
  CHECK(ring.total_length() == doctest::Approx(2 * pi * 100).epsilon(1e-9));
  const auto st = compile_track(test_support::stadium(200.0, 50.0));
  CHECK(st.total_length() == doctest::Approx(400 + 100 * pi).epsilon(1e-9));
  CHECK(st.centerline().front().p == Vec2{0, 0});
  for (std::size_t i = 1; i < st.centerline().size(); ++i) {
    CHECK(norm(st.centerline()[i].p - st.centerline()[i - 1].p) <= kMaxSampleSpacing + 1e-12);
  }
}

TEST_CASE("compile: error cases") {
  TrackSpec open;
  open.name = "open";
  open.segments = {SegmentSpec::straight(100), SegmentSpec::straight(100)};
  CHECK(compile_error(open) == ErrorCode::NonClosedLoop);

  auto degenerate = test_support::stadium();
  degenerate.segments[0].length = 0.0;
  CHECK(compile_error(degenerate) == ErrorCode::DegenerateSegment);

  auto narrow_arc = test_support::stadium(200.0, 5.0);  // radius below width / 2
  CHECK(compile_error(narrow_arc) == ErrorCode::DegenerateSegment);

  auto bad_width = test_support::stadium();
  bad_width.width = -1.0;
  CHECK(compile_error(bad_width) == ErrorCode::DegenerateSegment);

  // A figure-eight closes in position and heading but crosses itself.
  TrackSpec eight;
  eight.name = "eight";
  eight.segments = {SegmentSpec::arc(50, 2 * pi), SegmentSpec::arc(50, -2 * pi)};
  CHECK(compile_error(eight) == ErrorCode::SelfIntersectingBoundary);

  TrackSpec empty;
  CHECK(compile_error(empty) == ErrorCode::DegenerateSegment);
}

TEST_CASE("project: offsets and arclength") {
  const auto ring = compile_track(test_support::ring(100.0));
  // The ring runs counter-clockwise, so the centre lies to the left.
  const auto out = ring.project({103.0, 0.0});
  CHECK(out.offset == doctest::Approx(-3.0).epsilon(1e-6));
  const auto in = ring.project({97.0, 0.0});
  CHECK(in.offset == doctest::Approx(3.0).epsilon(1e-4));  // chords sit inside the arc

  const auto st = compile_track(test_support::stadium(200.0, 50.0));
  const auto p = st.project({100.0, 2.0});
  CHECK(p.offset == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(p.s == doctest::Approx(100.0).epsilon(1e-12));
  for (std::size_t i = 0; i < st.centerline().size(); i += 37) {
    const auto& c = st.centerline()[i];
    const auto q = st.project(c.p);
    CHECK(std::abs(q.offset) < 1e-9);
    CHECK(q.s >= 0.0);
    CHECK(q.s < st.total_length());
  }
}

TEST_CASE("contains: inclusive boundary") {
  const auto st = compile_track(test_support::stadium(200.0, 50.0));
  CHECK(st.contains({100.0, 7.4}));
  CHECK_FALSE(st.contains({100.0, 7.6}));
  CHECK(st.contains({100.0, 7.5}));
  CHECK(st.contains({100.0, -7.5}));
}

TEST_CASE("ray_cast: closed-form cases") {
  const auto st = compile_track(test_support::stadium(400.0, 100.0));
  CHECK(st.ray_cast({200.0, 0.0}, {0.0, 1.0}, 100.0) == doctest::Approx(7.5).epsilon(1e-12));
  CHECK(st.ray_cast({200.0, 0.0}, {0.0, -1.0}, 100.0) == doctest::Approx(7.5).epsilon(1e-12));
  // Along the straight the far wall is out of range.
  CHECK(st.ray_cast({0.0, 0.0}, {1.0, 0.0}, 200.0) == 200.0);
  const auto ring = compile_track(test_support::ring(100.0));
  CHECK(ring.ray_cast({100.0, 0.0}, {1.0, 0.0}, 100.0) == doctest::Approx(7.5).epsilon(1e-9));
  CHECK_THROWS_AS(st.ray_cast({200.0, 50.0}, {1.0, 0.0}, 100.0), Error);
}

TEST_CASE("ray_cast matches brute force on every builtin track") {
  for (const auto& spec : builtin_tracks()) {
    const auto t = compile_track(spec);
    const rng::CounterRng g(rng::derive(77, spec.segments.size()));
    int checked = 0;
    for (std::uint64_t k = 0; checked < 300; ++k) {
      const double s = g.uniform(4 * k) * t.total_length();
      const double lateral = (g.uniform(4 * k + 1) - 0.5) * t.width() * 0.98;
      const double angle = g.uniform(4 * k + 2) * 2 * pi;
      const Vec2 c = t.point_at(s);
      const auto proj = t.project(c);
      const Vec2 o = c + lateral * unit_from_angle(proj.tangent_heading + pi / 2);
      if (!t.contains(o)) continue;
      const Vec2 d = unit_from_angle(angle);
      CHECK(t.ray_cast(o, d, 100.0) == doctest::Approx(brute_force_ray(t, o, d, 100.0)).epsilon(1e-9));
      ++checked;
    }
  }
}

TEST_CASE("builtin tracks") {
  const auto names = builtin_names();
  CHECK(names.size() >= 5);
  for (const char* n : {"train-loop", "eval-a", "eval-b", "eval-c", "hairpin"}) {
    REQUIRE(find_builtin(n).has_value());
    CHECK(compile_track(*find_builtin(n)).width() == 15.0);
  }
  const auto train = compile_track(*find_builtin("train-loop"));
  CHECK(train.total_length() >= 3000.0);
  CHECK(train.min_arc_radius() >= 60.0);
  CHECK(compile_track(*find_builtin("hairpin")).min_arc_radius() <= 20.0);
  int tight = 0;
  for (const auto& seg : find_builtin("hairpin")->segments) {
    if (seg.kind == SegmentKind::Arc && seg.radius <= 20.0) ++tight;
  }
  CHECK(tight >= 2);
  CHECK_FALSE(find_builtin("nope").has_value());
}

TEST_CASE("progress tracker counts a lap only after most of the length") {
  ProgressTracker p(100.0, 0.0);
  CHECK_FALSE(p.update(99.0));  // backwards wrap right after the start
  CHECK_FALSE(p.update(1.0));
  for (double s = 2.0; s < 100.0; s += 1.0) CHECK_FALSE(p.update(s));
  CHECK(p.update(0.5));
  CHECK(p.laps() == 1);
}

TEST_CASE("normalize_angle range") {
  CHECK(normalize_angle(pi) == doctest::Approx(pi));
  CHECK(normalize_angle(-pi) == doctest::Approx(pi));
  CHECK(normalize_angle(3 * pi / 2) == doctest::Approx(-pi / 2));
  CHECK(normalize_angle(0.25) == 0.25);
}
