#include "skfmatch/road_map.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace skfmatch {

namespace {

bool same_node(MapPoint p, MapPoint q) {
  return std::hypot(p.x - q.x, p.y - q.y) <= RoadMap::kNodeTolerance;
}

bool finite(MapPoint p) { return std::isfinite(p.x) && std::isfinite(p.y); }

}  // namespace

double Segment::length() const { return std::hypot(b.x - a.x, b.y - a.y); }

bool Segment::is_connected_to(SegmentId other) const {
  return std::binary_search(connected.begin(), connected.end(), other);
}

void MapErrorModel::validate() const {
  if (!(absolute_error > 0.0) || !(relative_error > 0.0) || !(containment_sigma > 0.0)) {
    throw MapError("map error model: all terms must be > 0");
  }
}

RoadMap::RoadMap(std::vector<Segment> segments, MapErrorModel errors, MapOrigin origin,
                 Connectivity connectivity)
    : segments_(std::move(segments)), errors_(errors), origin_(origin) {
  errors_.validate();
  if (!(std::abs(origin_.lat) < 90.0)) throw MapError("map origin latitude out of range");

  by_id_.reserve(segments_.size());
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const Segment& s = segments_[i];
    if (!finite(s.a) || !finite(s.b)) {
      throw MapError("segment " + std::to_string(s.id) + ": non-finite coordinates");
    }
    if (!(s.length() > 0.0)) throw MapError("segment " + std::to_string(s.id) + ": zero length");
    if (!(s.width > 0.0) || !std::isfinite(s.width)) {
      throw MapError("segment " + std::to_string(s.id) + ": width must be > 0");
    }
    if (s.id == kOffRoad) throw MapError("segment id -1 is reserved");
    if (!by_id_.emplace(s.id, i).second) {
      throw MapError("duplicate segment id " + std::to_string(s.id));
    }
  }

  if (connectivity == Connectivity::derive) {
    for (auto& s : segments_) s.connected.clear();
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      for (std::size_t j = i + 1; j < segments_.size(); ++j) {
        const Segment& p = segments_[i];
        const Segment& q = segments_[j];
        if (same_node(p.a, q.a) || same_node(p.a, q.b) || same_node(p.b, q.a) ||
            same_node(p.b, q.b)) {
          segments_[i].connected.push_back(q.id);
          segments_[j].connected.push_back(p.id);
        }
      }
    }
  }

  for (auto& s : segments_) {
    std::sort(s.connected.begin(), s.connected.end());
    s.connected.erase(std::unique(s.connected.begin(), s.connected.end()), s.connected.end());
  }
  for (const auto& s : segments_) {
    for (SegmentId other : s.connected) {
      if (other == s.id) {
        throw MapError("segment " + std::to_string(s.id) + " lists itself as connected");
      }
      const Segment* o = find(other);
      if (o == nullptr) {
        throw MapError("segment " + std::to_string(s.id) + ": dangling reference to " +
                       std::to_string(other));
      }
      if (!o->is_connected_to(s.id)) {
        throw MapError("connectivity between " + std::to_string(s.id) + " and " +
                       std::to_string(other) + " is not symmetric");
      }
    }
  }

  build_index();
}

const Segment* RoadMap::find(SegmentId id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &segments_[it->second];
}

const Segment& RoadMap::segment(SegmentId id) const {
  const Segment* s = find(id);
  if (s == nullptr) throw MapError("unknown segment id " + std::to_string(id));
  return *s;
}

std::size_t RoadMap::CellHash::operator()(const CellKey& k) const noexcept {
  const auto ux = static_cast<std::uint64_t>(k.ix);
  const auto uy = static_cast<std::uint64_t>(k.iy);
  return static_cast<std::size_t>(ux * 0x9E3779B97F4A7C15ULL ^ (uy + 0x632BE59BD9B4E019ULL));
}

RoadMap::CellKey RoadMap::cell_of(MapPoint p) const {
  return {static_cast<std::int64_t>(std::floor(p.x / cell_size_)),
          static_cast<std::int64_t>(std::floor(p.y / cell_size_))};
}

void RoadMap::build_index() {
  cells_.clear();
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const Segment& s = segments_[i];
    const CellKey lo = cell_of({std::min(s.a.x, s.b.x), std::min(s.a.y, s.b.y)});
    const CellKey hi = cell_of({std::max(s.a.x, s.b.x), std::max(s.a.y, s.b.y)});
    for (std::int64_t ix = lo.ix; ix <= hi.ix; ++ix) {
      for (std::int64_t iy = lo.iy; iy <= hi.iy; ++iy) cells_[{ix, iy}].push_back(i);
    }
  }
}

std::vector<std::size_t> RoadMap::query_box(MapPoint lo, MapPoint hi) const {
  std::vector<std::size_t> out;
  const CellKey clo = cell_of(lo);
  const CellKey chi = cell_of(hi);
  for (std::int64_t ix = clo.ix; ix <= chi.ix; ++ix) {
    for (std::int64_t iy = clo.iy; iy <= chi.iy; ++iy) {
      auto it = cells_.find({ix, iy});
      if (it != cells_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Projection project_onto_segment(MapPoint p, const Segment& seg) {
  const double dx = seg.b.x - seg.a.x;
  const double dy = seg.b.y - seg.a.y;
  const double len2 = dx * dx + dy * dy;
  const double t = ((p.x - seg.a.x) * dx + (p.y - seg.a.y) * dy) / len2;

  Projection out;
  if (t <= 0.0) {
    out.point = seg.a;
    out.abscissa = 0.0;
    out.clamped = t < 0.0;
  } else if (t >= 1.0) {
    out.point = seg.b;
    out.abscissa = seg.length();
    out.clamped = t > 1.0;
  } else {
    out.point = {seg.a.x + t * dx, seg.a.y + t * dy};
    out.abscissa = std::min(t * seg.length(), seg.length());
  }
  out.distance = std::hypot(p.x - out.point.x, p.y - out.point.y);
  return out;
}

double segment_heading(const Segment& seg) {
  return normalize_angle(std::atan2(seg.b.y - seg.a.y, seg.b.x - seg.a.x));
}

std::vector<const Segment*> select_candidates(const RoadMap& map, MapPoint center, double radius) {
  if (!(radius > 0.0)) throw MapError("candidate radius must be > 0");

  struct Hit {
    double distance;
    const Segment* seg;
  };
  std::vector<Hit> hits;
  for (std::size_t i : map.query_box({center.x - radius, center.y - radius},
                                     {center.x + radius, center.y + radius})) {
    const Segment& s = map.segments()[i];
    const double d = project_onto_segment(center, s).distance;
    if (d <= radius) hits.push_back({d, &s});
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& l, const Hit& r) {
    if (l.distance != r.distance) return l.distance < r.distance;
    return l.seg->id < r.seg->id;
  });

  std::vector<const Segment*> out;
  out.reserve(hits.size());
  for (const Hit& h : hits) out.push_back(h.seg);
  return out;
}

Eigen::Matrix3d carto_covariance(const Segment& seg, const MapErrorModel& errors) {
  const double length = seg.length();
  if (!(length > 0.0)) throw MapError("carto covariance of a zero-length segment");

  const double sigma_along = (0.5 * length + errors.absolute_error) / errors.containment_sigma;
  const double sigma_across = (0.5 * seg.width + errors.relative_error) / errors.containment_sigma;
  const double sigma_heading = std::atan2(2.0 * errors.relative_error, length);

  const double phi = segment_heading(seg);
  Eigen::Matrix2d rot;
  rot << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
  const Eigen::Matrix2d axes =
      Eigen::Vector2d(sigma_along * sigma_along, sigma_across * sigma_across).asDiagonal();

  Eigen::Matrix3d q = Eigen::Matrix3d::Zero();
  Eigen::Matrix2d pos = rot * axes * rot.transpose();
  q.topLeftCorner<2, 2>() = 0.5 * (pos + pos.transpose());
  q(2, 2) = sigma_heading * sigma_heading;
  return q;
}

}  // namespace skfmatch
