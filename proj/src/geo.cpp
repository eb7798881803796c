#include "skfmatch/geo.hpp"

#include <cmath>
#include <stdexcept>

namespace skfmatch {

namespace {

constexpr double kWgs84A = 6378137.0;
constexpr double kWgs84F = 1.0 / 298.257223563;
constexpr double kWgs84E2 = kWgs84F * (2.0 - kWgs84F);
constexpr double kDegToRad = kPi / 180.0;

}  // namespace

GeoReference GeoReference::at(double lat_deg, double lon_deg) {
  if (!(std::abs(lat_deg) < 90.0)) throw std::invalid_argument("geo reference: |lat| must be < 90");
  const double s = std::sin(lat_deg * kDegToRad);
  const double w2 = 1.0 - kWgs84E2 * s * s;
  GeoReference ref;
  ref.lat0 = lat_deg;
  ref.lon0 = lon_deg;
  ref.meridional_radius = kWgs84A * (1.0 - kWgs84E2) / (w2 * std::sqrt(w2));
  ref.normal_radius = kWgs84A / std::sqrt(w2);
  return ref;
}

MapPoint latlon_to_map(double lat_deg, double lon_deg, const GeoReference& ref) {
  const double cos0 = std::cos(ref.lat0 * kDegToRad);
  return {(lon_deg - ref.lon0) * kDegToRad * cos0 * ref.normal_radius,
          (lat_deg - ref.lat0) * kDegToRad * ref.meridional_radius};
}

LatLon map_to_latlon(MapPoint p, const GeoReference& ref) {
  const double cos0 = std::cos(ref.lat0 * kDegToRad);
  return {ref.lat0 + p.y / (kDegToRad * ref.meridional_radius),
          ref.lon0 + p.x / (kDegToRad * cos0 * ref.normal_radius)};
}

}  // namespace skfmatch
