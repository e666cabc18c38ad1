#pragma once

#include <numbers>

#include "uadrive/track.hpp"

namespace test_support {

using uadrive::track::SegmentSpec;
using uadrive::track::TrackSpec;

inline TrackSpec stadium(double straight = 200.0, double radius = 50.0) {
  TrackSpec spec;
  spec.name = "stadium";
  spec.segments = {SegmentSpec::straight(straight), SegmentSpec::arc(radius, std::numbers::pi),
                   SegmentSpec::straight(straight), SegmentSpec::arc(radius, std::numbers::pi)};
  return spec;
}

inline TrackSpec ring(double radius = 100.0) {
  TrackSpec spec;
  spec.name = "ring";
  spec.segments = {SegmentSpec::arc(radius, 2.0 * std::numbers::pi)};
  spec.start = {radius, 0.0, std::numbers::pi / 2};
  return spec;
}

}  // namespace test_support
