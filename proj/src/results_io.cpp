#include "skfmatch/results_io.hpp"

#include <json.hpp>

#include <istream>
#include <ostream>
#include <stdexcept>

#include "skfmatch/geo.hpp"
#include "text_util.hpp"

namespace skfmatch {

using detail::format_double;

namespace {

[[noreturn]] void fail(const char* file, std::size_t line, const std::string& what) {
  throw std::runtime_error(std::string(file) + " line " + std::to_string(line) + ": " + what);
}

double number(std::string_view tok, const char* file, std::size_t line) {
  auto v = detail::parse_double(tok);
  if (!v) fail(file, line, "bad number '" + std::string(tok) + "'");
  return *v;
}

std::int64_t integer(std::string_view tok, const char* file, std::size_t line) {
  auto v = detail::parse_int(tok);
  if (!v) fail(file, line, "bad integer '" + std::string(tok) + "'");
  return *v;
}

}  // namespace

void write_results_csv(std::ostream& out, const std::vector<MatchResult>& results) {
  out << kResultsHeader << '\n';
  for (const MatchResult& r : results) {
    std::string hyps;
    for (const auto& h : r.hypotheses) {
      if (!hyps.empty()) hyps.push_back(';');
      hyps += std::to_string(h.segment_id) + ':' + format_double(h.weight);
    }
    const Eigen::Matrix3d& c = r.best.cov;
    out << r.step << ',' << format_double(r.time) << ',' << r.best_segment << ','
        << format_double(r.best.mean.x) << ',' << format_double(r.best.mean.y) << ','
        << format_double(r.best.mean.theta) << ',' << format_double(r.best_weight) << ','
        << r.hypotheses.size() << ',' << (r.gps_used ? 1 : 0) << ',' << hyps << ','
        << r.candidate_count << ',' << (r.off_road ? 1 : 0) << ',' << format_double(c(0, 0))
        << ',' << format_double(c(0, 1)) << ',' << format_double(c(0, 2)) << ','
        << format_double(c(1, 1)) << ',' << format_double(c(1, 2)) << ','
        << format_double(c(2, 2)) << '\n';
  }
}

std::vector<MatchResult> read_results_csv(std::istream& in) {
  constexpr const char* kFile = "results";
  std::vector<MatchResult> out;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = detail::trim(raw);
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != kResultsHeader) fail(kFile, line_no, "unexpected header");
      continue;
    }
    const auto f = detail::split(line, ',');
    if (f.size() != 18) fail(kFile, line_no, "expected 18 columns");

    MatchResult r;
    r.step = static_cast<std::size_t>(integer(f[0], kFile, line_no));
    r.time = number(f[1], kFile, line_no);
    r.best_segment = integer(f[2], kFile, line_no);
    r.best.mean = {number(f[3], kFile, line_no), number(f[4], kFile, line_no),
                   number(f[5], kFile, line_no)};
    r.best_weight = number(f[6], kFile, line_no);
    const auto count = static_cast<std::size_t>(integer(f[7], kFile, line_no));
    r.gps_used = integer(f[8], kFile, line_no) != 0;
    if (!f[9].empty()) {
      for (std::string_view pair : detail::split(f[9], ';')) {
        const auto colon = pair.find(':');
        if (colon == std::string_view::npos) fail(kFile, line_no, "bad hypothesis entry");
        r.hypotheses.push_back({integer(pair.substr(0, colon), kFile, line_no),
                                number(pair.substr(colon + 1), kFile, line_no), r.best.mean});
      }
    }
    if (r.hypotheses.size() != count) fail(kFile, line_no, "n_hypotheses disagrees with list");
    r.candidate_count = static_cast<std::size_t>(integer(f[10], kFile, line_no));
    r.off_road = integer(f[11], kFile, line_no) != 0;
    Eigen::Matrix3d& c = r.best.cov;
    c(0, 0) = number(f[12], kFile, line_no);
    c(0, 1) = c(1, 0) = number(f[13], kFile, line_no);
    c(0, 2) = c(2, 0) = number(f[14], kFile, line_no);
    c(1, 1) = number(f[15], kFile, line_no);
    c(1, 2) = c(2, 1) = number(f[16], kFile, line_no);
    c(2, 2) = number(f[17], kFile, line_no);
    out.push_back(std::move(r));
  }
  return out;
}

void write_truth_csv(std::ostream& out, const GroundTruth& truth) {
  out << kTruthHeader << '\n';
  out << "-1," << format_double(truth.start_time) << ',' << format_double(truth.initial.x) << ','
      << format_double(truth.initial.y) << ',' << format_double(truth.initial.theta) << ','
      << truth.initial_segment << '\n';
  for (std::size_t i = 0; i < truth.steps.size(); ++i) {
    const TruthStep& t = truth.steps[i];
    out << i << ',' << format_double(t.time) << ',' << format_double(t.pose.x) << ','
        << format_double(t.pose.y) << ',' << format_double(t.pose.theta) << ',' << t.segment_id
        << '\n';
  }
}

GroundTruth read_truth_csv(std::istream& in) {
  constexpr const char* kFile = "truth";
  GroundTruth truth;
  bool have_initial = false;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = detail::trim(raw);
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != kTruthHeader) fail(kFile, line_no, "unexpected header");
      continue;
    }
    const auto f = detail::split(line, ',');
    if (f.size() != 6) fail(kFile, line_no, "expected 6 columns");
    const std::int64_t step = integer(f[0], kFile, line_no);
    const Pose pose{number(f[2], kFile, line_no), number(f[3], kFile, line_no),
                    number(f[4], kFile, line_no)};
    const double time = number(f[1], kFile, line_no);
    const SegmentId seg = integer(f[5], kFile, line_no);
    if (step == -1) {
      truth.start_time = time;
      truth.initial = pose;
      truth.initial_segment = seg;
      have_initial = true;
    } else {
      if (step != static_cast<std::int64_t>(truth.steps.size())) {
        fail(kFile, line_no, "steps must be consecutive from 0");
      }
      truth.steps.push_back({time, pose, seg});
    }
  }
  if (!have_initial) fail(kFile, line_no, "missing initial row (step -1)");
  return truth;
}

std::string track_to_geojson(const RoadMap& map, const std::vector<MatchResult>& results) {
  using nlohmann::json;
  const GeoReference ref = GeoReference::at(map.origin());
  json line = json::array();
  json features = json::array();
  for (const MatchResult& r : results) {
    const LatLon ll = map_to_latlon({r.best.mean.x, r.best.mean.y}, ref);
    line.push_back({ll.lon, ll.lat});
    json weights = json::object();
    for (const auto& h : r.hypotheses) weights[std::to_string(h.segment_id)] = h.weight;
    features.push_back({
        {"type", "Feature"},
        {"geometry", {{"type", "Point"}, {"coordinates", {ll.lon, ll.lat}}}},
        {"properties",
         {{"step", r.step},
          {"time", r.time},
          {"best_segment", r.best_segment},
          {"theta", r.best.mean.theta},
          {"n_hypotheses", r.hypotheses.size()},
          {"gps_used", r.gps_used},
          {"off_road", r.off_road},
          {"weights", weights}}},
    });
  }
  json track = {
      {"type", "Feature"},
      {"geometry", {{"type", "LineString"}, {"coordinates", line}}},
      {"properties", {{"name", "matched_track"}, {"steps", results.size()}}},
  };
  features.insert(features.begin(), track);
  return json{{"type", "FeatureCollection"}, {"features", features}}.dump();
}

}  // namespace skfmatch
