#include "skfmatch/motion.hpp"

#include <cmath>
#include <stdexcept>

#include "skfmatch/angles.hpp"

namespace skfmatch {

Pose Pose::from_vector(const Eigen::Vector3d& v) { return {v(0), v(1), normalize_angle(v(2))}; }

void VehicleParams::validate() const {
  if (!(track > 0.0)) throw std::invalid_argument("vehicle track must be > 0");
  if (!(odo_noise.sigma_s >= 0.0) || !(odo_noise.sigma_theta >= 0.0)) {
    throw std::invalid_argument("odometry noise must be >= 0");
  }
}

ElementaryMotion wheel_to_elementary(const OdometryInput& odo, const VehicleParams& params) {
  return {0.5 * (odo.d_left + odo.d_right), (odo.d_right - odo.d_left) / params.track};
}

OdometryInput elementary_to_wheel(const ElementaryMotion& motion, const VehicleParams& params) {
  const double half = 0.5 * motion.delta_theta * params.track;
  return {motion.delta_s - half, motion.delta_s + half};
}

Pose advance_pose(const Pose& pose, const ElementaryMotion& motion) {
  const double mid = pose.theta + 0.5 * motion.delta_theta;
  return {pose.x + motion.delta_s * std::cos(mid), pose.y + motion.delta_s * std::sin(mid),
          normalize_angle(pose.theta + motion.delta_theta)};
}

ElementaryMotion recover_motion(const Pose& from, const Pose& to) {
  const double dtheta = angle_difference(to.theta, from.theta);
  const double mid = from.theta + 0.5 * dtheta;
  const double ds = (to.x - from.x) * std::cos(mid) + (to.y - from.y) * std::sin(mid);
  return {ds, dtheta};
}

MotionJacobians motion_jacobians(const Pose& pose, const ElementaryMotion& motion) {
  const double mid = pose.theta + 0.5 * motion.delta_theta;
  const double c = std::cos(mid);
  const double s = std::sin(mid);
  const double ds = motion.delta_s;

  MotionJacobians j;
  j.state << 1.0, 0.0, -ds * s,
             0.0, 1.0, ds * c,
             0.0, 0.0, 1.0;
  j.input << c, -0.5 * ds * s,
             s, 0.5 * ds * c,
             0.0, 1.0;
  return j;
}

Eigen::Matrix2d odometry_covariance(const ElementaryMotion& motion, const VehicleParams& params) {
  const double dist = std::abs(motion.delta_s);
  const double ss = params.odo_noise.sigma_s * dist;
  const double st = params.odo_noise.sigma_theta * dist;
  return Eigen::Vector2d(ss * ss, st * st).asDiagonal();
}

StateEstimate predict(const StateEstimate& state, const ElementaryMotion& motion,
                      const VehicleParams& params) {
  const MotionJacobians j = motion_jacobians(state.mean, motion);
  StateEstimate out;
  out.mean = advance_pose(state.mean, motion);
  Eigen::Matrix3d p = j.state * state.cov * j.state.transpose() +
                      j.input * odometry_covariance(motion, params) * j.input.transpose();
  out.cov = 0.5 * (p + p.transpose());
  return out;
}

}  // namespace skfmatch
