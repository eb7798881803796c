#pragma once

#include <Eigen/Core>

namespace skfmatch {

/// Pose of the rear-axle center M in the map frame.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // (-pi, pi]

  Eigen::Vector3d vector() const { return {x, y, theta}; }
  static Pose from_vector(const Eigen::Vector3d& v);
  friend bool operator==(const Pose&, const Pose&) = default;
};

struct StateEstimate {
  Pose mean;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
};

/// Rear-wheel arc lengths over one sampling period, from the ABS encoders.
struct OdometryInput {
  double d_left = 0.0;
  double d_right = 0.0;
};

/// Arc length followed by M and rotation of the vehicle frame over one period.
struct ElementaryMotion {
  double delta_s = 0.0;
  double delta_theta = 0.0;
};

/// Odometry noise, as standard deviations per meter traveled.
struct OdometryNoise {
  double sigma_s = 0.02;      // m/m
  double sigma_theta = 0.01;  // rad/m
};

struct VehicleParams {
  double track = 1.5;  // rear axle width, m
  OdometryNoise odo_noise;

  void validate() const;
};

ElementaryMotion wheel_to_elementary(const OdometryInput& odo, const VehicleParams& params);
OdometryInput elementary_to_wheel(const ElementaryMotion& motion, const VehicleParams& params);

/// Mean update of the circular-arc motion model with midpoint heading.
Pose advance_pose(const Pose& pose, const ElementaryMotion& motion);

/// The (delta_s, delta_theta) that advance_pose maps `from` onto `to`. Exact when such a motion
/// exists; otherwise delta_s is the chord projected on the midpoint heading.
ElementaryMotion recover_motion(const Pose& from, const Pose& to);

struct MotionJacobians {
  Eigen::Matrix3d state;               // d advance_pose / d (x, y, theta)
  Eigen::Matrix<double, 3, 2> input;   // d advance_pose / d (delta_s, delta_theta)
};

MotionJacobians motion_jacobians(const Pose& pose, const ElementaryMotion& motion);

/// Odometry input covariance: diag((sigma_s |ds|)^2, (sigma_theta |ds|)^2).
Eigen::Matrix2d odometry_covariance(const ElementaryMotion& motion, const VehicleParams& params);

/// EKF prediction: P' = F P F^T + G Q G^T.
StateEstimate predict(const StateEstimate& state, const ElementaryMotion& motion,
                      const VehicleParams& params);

}  // namespace skfmatch
