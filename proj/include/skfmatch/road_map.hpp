#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "skfmatch/angles.hpp"

namespace skfmatch {

/// Planar point in the map frame: x east, y north, meters.
struct MapPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const MapPoint&, const MapPoint&) = default;
};

/// Straight piece of road centerline.
struct Segment {
  SegmentId id = 0;
  MapPoint a;
  MapPoint b;
  double width = 0.0;
  /// Ids of segments sharing an endpoint (or explicitly linked). Sorted, never contains `id`.
  std::vector<SegmentId> connected;

  double length() const;
  bool is_connected_to(SegmentId other) const;
};

/// Error budget of the digital map.
struct MapErrorModel {
  double absolute_error = 10.0;
  double relative_error = 1.0;
  /// The road-enclosing ellipse is drawn at this many standard deviations.
  double containment_sigma = 2.0;

  void validate() const;
  friend bool operator==(const MapErrorModel&, const MapErrorModel&) = default;
};

/// Geodetic anchor of the map frame (degrees). The local tangent plane is built around it.
struct MapOrigin {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const MapOrigin&, const MapOrigin&) = default;
};

struct Projection {
  MapPoint point;
  /// Distance from `a` along the segment, clamped to [0, length].
  double abscissa = 0.0;
  double distance = 0.0;
  /// True when the orthogonal foot fell outside the segment and an endpoint was used.
  bool clamped = false;
};

class MapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Immutable road network with a uniform-grid spatial index over segment bounding boxes.
class RoadMap {
 public:
  enum class Connectivity {
    /// Replace `connected` with the shared-endpoint relation.
    derive,
    /// Keep the given `connected` sets, checking they are symmetric and resolve.
    given,
  };

  /// Endpoints closer than this are treated as the same node.
  static constexpr double kNodeTolerance = 1e-6;

  RoadMap() = default;
  explicit RoadMap(std::vector<Segment> segments, MapErrorModel errors = {}, MapOrigin origin = {},
                   Connectivity connectivity = Connectivity::derive);

  const std::vector<Segment>& segments() const { return segments_; }
  std::size_t size() const { return segments_.size(); }
  bool empty() const { return segments_.empty(); }

  const Segment* find(SegmentId id) const;
  /// Throws MapError when the id is unknown.
  const Segment& segment(SegmentId id) const;

  const MapErrorModel& errors() const { return errors_; }
  const MapOrigin& origin() const { return origin_; }

  /// Indices into segments() whose bounding boxes overlap the query box. A superset of true hits.
  std::vector<std::size_t> query_box(MapPoint lo, MapPoint hi) const;

 private:
  struct CellKey {
    std::int64_t ix;
    std::int64_t iy;
    friend bool operator==(const CellKey&, const CellKey&) = default;
  };
  struct CellHash {
    std::size_t operator()(const CellKey& k) const noexcept;
  };

  void build_index();
  CellKey cell_of(MapPoint p) const;

  std::vector<Segment> segments_;
  std::unordered_map<SegmentId, std::size_t> by_id_;
  MapErrorModel errors_;
  MapOrigin origin_;
  double cell_size_ = 64.0;
  std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> cells_;
};

Projection project_onto_segment(MapPoint p, const Segment& seg);

/// Heading of a -> b in (-pi, pi].
double segment_heading(const Segment& seg);

/// Segments whose distance to `center` is at most `radius`, ordered by (distance, id).
std::vector<const Segment*> select_candidates(const RoadMap& map, MapPoint center, double radius);

/// Covariance of the cartographic observation in (x, y, heading): a road-enclosing ellipse
/// aligned with the segment plus a heading variance from the relative map error.
Eigen::Matrix3d carto_covariance(const Segment& seg, const MapErrorModel& errors);

// Map file I/O. The text format is documented in docs/formats.md.
RoadMap load_map(std::istream& in);
RoadMap load_map_file(const std::string& path);
void save_map(std::ostream& out, const RoadMap& map);
/// GeoJSON FeatureCollection, one LineString per segment in WGS84 lon/lat.
std::string map_to_geojson(const RoadMap& map);

}  // namespace skfmatch
