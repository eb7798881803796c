#pragma once

#include <cstdint>
#include <numbers>

namespace skfmatch {

using SegmentId = std::int64_t;

/// Segment id carried by the single hypothesis held while no road is in range.
inline constexpr SegmentId kOffRoad = -1;

inline constexpr double kPi = std::numbers::pi;

/// Wraps an angle to (-pi, pi].
double normalize_angle(double radians);

/// Signed smallest rotation taking `from` onto `to`, in (-pi, pi].
double angle_difference(double to, double from);

}  // namespace skfmatch
