#include "skfmatch/observation.hpp"

#include <cmath>

namespace skfmatch {

CartoObservation build_carto_observation(const Pose& mean, const Segment& seg,
                                         const MapErrorModel& errors) {
  const Projection proj = project_onto_segment({mean.x, mean.y}, seg);
  double heading = segment_heading(seg);
  if (std::abs(angle_difference(heading, mean.theta)) > 0.5 * kPi) {
    heading = normalize_angle(heading + kPi);
  }

  CartoObservation obs;
  obs.segment_id = seg.id;
  obs.z = {proj.point.x, proj.point.y, heading};
  obs.cov = carto_covariance(seg, errors);
  return obs;
}

GpsObservation build_gps_observation(const GpsFix& fix) {
  GpsObservation obs;
  obs.z = {fix.position.x, fix.position.y};
  obs.h << 1.0, 0.0, 0.0,
           0.0, 1.0, 0.0;
  obs.cov = fix.cov;
  return obs;
}

GpsFix make_gps_fix(const GgaFix& gga, const GstStats& gst, const GeoReference& ref, double time) {
  GpsFix fix;
  fix.time = time;
  fix.position = latlon_to_map(gga.lat, gga.lon, ref);
  fix.cov = gps_covariance(gst);
  return fix;
}

}  // namespace skfmatch
