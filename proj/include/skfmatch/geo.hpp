#pragma once

#include "skfmatch/road_map.hpp"

namespace skfmatch {

struct LatLon {
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees
};

/// Local tangent plane anchored at a geodetic origin (WGS84 ellipsoid). Equirectangular
/// at the origin: adequate for desk-scale extents of a few kilometres.
struct GeoReference {
  double lat0 = 0.0;
  double lon0 = 0.0;
  double meridional_radius = 0.0;  // M(lat0), meters
  double normal_radius = 0.0;      // N(lat0), meters

  static GeoReference at(double lat_deg, double lon_deg);
  static GeoReference at(const MapOrigin& origin) { return at(origin.lat, origin.lon); }
};

MapPoint latlon_to_map(double lat_deg, double lon_deg, const GeoReference& ref);
LatLon map_to_latlon(MapPoint p, const GeoReference& ref);

}  // namespace skfmatch
