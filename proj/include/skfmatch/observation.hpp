#pragma once

#include <Eigen/Core>

#include "skfmatch/geo.hpp"
#include "skfmatch/motion.hpp"
#include "skfmatch/nmea.hpp"
#include "skfmatch/road_map.hpp"

namespace skfmatch {

/// GPS position fix in the map frame with the receiver-reported covariance.
struct GpsFix {
  double time = 0.0;
  MapPoint position;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();
};

/// Pseudo-measurement of the full pose produced by one candidate segment.
struct CartoObservation {
  SegmentId segment_id = 0;
  Eigen::Vector3d z = Eigen::Vector3d::Zero();  // (x_carto, y_carto, cap_carto)
  Eigen::Matrix3d cov = Eigen::Matrix3d::Identity();
};

struct GpsObservation {
  Eigen::Vector2d z = Eigen::Vector2d::Zero();
  Eigen::Matrix<double, 2, 3> h = Eigen::Matrix<double, 2, 3>::Zero();
  Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();
};

/// Projects the pose onto the segment; the observed heading is whichever of the two segment
/// directions lies closer to the pose heading.
CartoObservation build_carto_observation(const Pose& mean, const Segment& seg,
                                         const MapErrorModel& errors);

GpsObservation build_gps_observation(const GpsFix& fix);

/// Combines a GGA fix and its GST statistics into a map-frame fix.
GpsFix make_gps_fix(const GgaFix& gga, const GstStats& gst, const GeoReference& ref, double time);

}  // namespace skfmatch
