#include <json.hpp>

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "skfmatch/geo.hpp"
#include "skfmatch/road_map.hpp"
#include "text_util.hpp"

namespace skfmatch {

using detail::format_double;
using detail::parse_double;

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw MapError("map line " + std::to_string(line) + ": " + what);
}

double number(std::string_view tok, std::size_t line, const char* field) {
  auto v = parse_double(tok);
  if (!v) fail(line, std::string("bad ") + field + " '" + std::string(tok) + "'");
  return *v;
}

}  // namespace

RoadMap load_map(std::istream& in) {
  std::vector<Segment> segments;
  std::vector<std::pair<SegmentId, SegmentId>> links;
  MapErrorModel errors;
  MapOrigin origin;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto tok = detail::split_ws(line);
    const std::string_view kind = tok[0];

    if (kind == "segment") {
      if (tok.size() != 7) fail(line_no, "segment expects 6 fields: id ax ay bx by width");
      auto id = detail::parse_int(tok[1]);
      if (!id) fail(line_no, "bad segment id '" + std::string(tok[1]) + "'");
      Segment s;
      s.id = *id;
      s.a = {number(tok[2], line_no, "ax"), number(tok[3], line_no, "ay")};
      s.b = {number(tok[4], line_no, "bx"), number(tok[5], line_no, "by")};
      s.width = number(tok[6], line_no, "width");
      segments.push_back(std::move(s));
    } else if (kind == "origin") {
      if (tok.size() != 3) fail(line_no, "origin expects: lat lon");
      origin = {number(tok[1], line_no, "lat"), number(tok[2], line_no, "lon")};
    } else if (kind == "errors") {
      if (tok.size() != 4) fail(line_no, "errors expects: absolute relative containment_sigma");
      errors = {number(tok[1], line_no, "absolute error"), number(tok[2], line_no, "relative error"),
                number(tok[3], line_no, "containment sigma")};
    } else if (kind == "link") {
      if (tok.size() != 3) fail(line_no, "link expects: id id");
      auto p = detail::parse_int(tok[1]);
      auto q = detail::parse_int(tok[2]);
      if (!p || !q) fail(line_no, "bad link ids");
      links.emplace_back(*p, *q);
    } else {
      fail(line_no, "unknown record '" + std::string(kind) + "'");
    }
  }

  if (links.empty()) return RoadMap(std::move(segments), errors, origin);

  // Explicit links extend the shared-endpoint relation.
  RoadMap derived(segments, errors, origin);
  std::vector<Segment> linked = derived.segments();
  auto locate = [&](SegmentId id) -> Segment& {
    for (auto& s : linked) {
      if (s.id == id) return s;
    }
    throw MapError("link references unknown segment " + std::to_string(id) +
                   " (dangling reference)");
  };
  for (auto [p, q] : links) {
    if (p == q) throw MapError("link of segment " + std::to_string(p) + " to itself");
    locate(p).connected.push_back(q);
    locate(q).connected.push_back(p);
  }
  return RoadMap(std::move(linked), errors, origin, RoadMap::Connectivity::given);
}

RoadMap load_map_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MapError("cannot open map file " + path);
  return load_map(in);
}

void save_map(std::ostream& out, const RoadMap& map) {
  out << "# skfmatch road map v1\n";
  out << "origin " << format_double(map.origin().lat) << ' ' << format_double(map.origin().lon)
      << '\n';
  const auto& e = map.errors();
  out << "errors " << format_double(e.absolute_error) << ' ' << format_double(e.relative_error)
      << ' ' << format_double(e.containment_sigma) << '\n';
  for (const Segment& s : map.segments()) {
    out << "segment " << s.id << ' ' << format_double(s.a.x) << ' ' << format_double(s.a.y) << ' '
        << format_double(s.b.x) << ' ' << format_double(s.b.y) << ' ' << format_double(s.width)
        << '\n';
  }
  // Links that the shared-endpoint rule would not recover.
  RoadMap derived(map.segments(), map.errors(), map.origin());
  for (const Segment& s : map.segments()) {
    const Segment& d = derived.segment(s.id);
    for (SegmentId other : s.connected) {
      if (other > s.id && !d.is_connected_to(other)) out << "link " << s.id << ' ' << other << '\n';
    }
  }
}

std::string map_to_geojson(const RoadMap& map) {
  using nlohmann::json;
  const GeoReference ref = GeoReference::at(map.origin());
  json features = json::array();
  for (const Segment& s : map.segments()) {
    const LatLon a = map_to_latlon(s.a, ref);
    const LatLon b = map_to_latlon(s.b, ref);
    features.push_back({
        {"type", "Feature"},
        {"geometry", {{"type", "LineString"}, {"coordinates", {{a.lon, a.lat}, {b.lon, b.lat}}}}},
        {"properties", {{"id", s.id}, {"width", s.width}}},
    });
  }
  return json{{"type", "FeatureCollection"}, {"features", features}}.dump();
}

}  // namespace skfmatch
