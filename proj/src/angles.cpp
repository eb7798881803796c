#include "skfmatch/angles.hpp"

#include <cmath>

namespace skfmatch {

double normalize_angle(double radians) {
  double a = std::remainder(radians, 2.0 * kPi);  // [-pi, pi]
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

double angle_difference(double to, double from) { return normalize_angle(to - from); }

}  // namespace skfmatch
