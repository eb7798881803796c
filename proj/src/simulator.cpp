#include "skfmatch/simulator.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "skfmatch/geo.hpp"
#include "skfmatch/nmea.hpp"

namespace skfmatch {

namespace {

constexpr double kDegToRad = kPi / 180.0;

/// Ordered polyline of map segments the vehicle drives along.
struct Route {
  std::vector<SegmentId> ids;
  std::vector<MapPoint> points;  // ids.size() + 1 vertices
  std::vector<double> cumulative;

  void finish() {
    cumulative.assign(points.size(), 0.0);
    for (std::size_t i = 1; i < points.size(); ++i) {
      cumulative[i] = cumulative[i - 1] + std::hypot(points[i].x - points[i - 1].x,
                                                     points[i].y - points[i - 1].y);
    }
  }
  double total() const { return cumulative.back(); }

  MapPoint at(double s) const {
    s = std::clamp(s, 0.0, total());
    std::size_t i = 0;
    while (i + 1 < ids.size() && s > cumulative[i + 1]) ++i;
    const double t = (s - cumulative[i]) / (cumulative[i + 1] - cumulative[i]);
    return {points[i].x + t * (points[i + 1].x - points[i].x),
            points[i].y + t * (points[i + 1].y - points[i].y)};
  }

  Segment piece(std::size_t i) const { return {ids[i], points[i], points[i + 1], 1.0, {}}; }
};

struct RoutePosition {
  std::size_t index = 0;
  double s = 0.0;
};

/// Nearest route piece, searching forward from `hint` so progress is monotone.
RoutePosition locate(const Route& route, MapPoint p, std::size_t hint) {
  RoutePosition best{hint, 0.0};
  double best_distance = std::numeric_limits<double>::infinity();
  const std::size_t last = std::min(hint + 2, route.ids.size() - 1);
  for (std::size_t i = hint; i <= last; ++i) {
    const Projection proj = project_onto_segment(p, route.piece(i));
    if (proj.distance < best_distance) {
      best_distance = proj.distance;
      best = {i, route.cumulative[i] + proj.abscissa};
    }
  }
  return best;
}

Segment make_segment(SegmentId id, MapPoint a, MapPoint b, double width) {
  return {id, a, b, width, {}};
}

struct Layout {
  std::vector<Segment> segments;
  Route route;
  std::optional<SegmentId> branch;
};

Layout build_layout(const Scenario& s) {
  Layout out;
  const double w = s.road_width;
  switch (s.kind) {
    case ScenarioKind::straight: {
      out.segments.push_back(make_segment(1, {0, 0}, {s.length, 0}, w));
      out.route.ids = {1};
      out.route.points = {{0, 0}, {s.length, 0}};
      break;
    }
    case ScenarioKind::parallel: {
      out.segments.push_back(make_segment(1, {0, 0}, {s.length, 0}, w));
      out.segments.push_back(
          make_segment(2, {0, s.lane_separation}, {s.length, s.lane_separation}, w));
      out.route.ids = {1};
      out.route.points = {{0, 0}, {s.length, 0}};
      break;
    }
    case ScenarioKind::junction: {
      const MapPoint fork{s.length, 0.0};
      const double half = 0.5 * s.junction_angle_deg * kDegToRad;
      const MapPoint left{fork.x + s.branch_length * std::cos(half),
                          fork.y + s.branch_length * std::sin(half)};
      const MapPoint right{fork.x + s.branch_length * std::cos(half),
                           fork.y - s.branch_length * std::sin(half)};
      out.segments.push_back(make_segment(1, {0, 0}, fork, w));
      out.segments.push_back(make_segment(2, fork, left, w));
      out.segments.push_back(make_segment(3, fork, right, w));
      const SegmentId taken = s.taken_branch == 0 ? 2 : 3;
      out.route.ids = {1, taken};
      out.route.points = {{0, 0}, fork, s.taken_branch == 0 ? left : right};
      out.branch = taken;
      break;
    }
    case ScenarioKind::outage: {
      const auto pieces = static_cast<std::size_t>(std::ceil(s.length / s.segment_length));
      const int pattern[4] = {1, -1, -1, 1};
      MapPoint p{0, 0};
      double heading = 0.0;
      out.route.points.push_back(p);
      for (std::size_t k = 0; k < pieces; ++k) {
        const MapPoint q{p.x + s.segment_length * std::cos(heading),
                         p.y + s.segment_length * std::sin(heading)};
        const auto id = static_cast<SegmentId>(k + 1);
        out.segments.push_back(make_segment(id, p, q, w));
        out.route.ids.push_back(id);
        out.route.points.push_back(q);
        heading += pattern[k % 4] * s.turn_angle_deg * kDegToRad;
        p = q;
      }
      break;
    }
  }
  out.route.finish();
  return out;
}

double number_or(const nlohmann::json& j, const char* key, double fallback) {
  return j.contains(key) ? j.at(key).get<double>() : fallback;
}

}  // namespace

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::straight: return "straight";
    case ScenarioKind::outage: return "outage";
    case ScenarioKind::parallel: return "parallel";
    case ScenarioKind::junction: return "junction";
  }
  return "unknown";
}

ScenarioKind scenario_kind_from_string(std::string_view name) {
  for (auto k : {ScenarioKind::straight, ScenarioKind::outage, ScenarioKind::parallel,
                 ScenarioKind::junction}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown scenario kind '" + std::string(name) + "'");
}

Scenario Scenario::defaults(ScenarioKind kind) {
  Scenario s;
  s.kind = kind;
  switch (kind) {
    case ScenarioKind::straight:
      s.length = 1000.0;
      break;
    case ScenarioKind::outage:
      s.length = 1750.0;
      s.segment_length = 250.0;
      s.turn_angle_deg = 20.0;
      s.outages = {{0, OutageWindow::kToEnd}};
      break;
    case ScenarioKind::parallel:
      s.length = 500.0;
      s.lane_separation = 10.0;
      s.gps_bias_y = 6.0;  // towards the road the vehicle is not on
      break;
    case ScenarioKind::junction:
      s.length = 200.0;
      s.branch_length = 300.0;
      s.junction_angle_deg = 30.0;
      s.outages = {{15, OutageWindow::kToEnd}};  // GPS lost a few steps before the fork
      break;
  }
  return s;
}

void Scenario::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("infeasible scenario: ") + what);
  };
  require(length > 0.0 && std::isfinite(length), "length must be > 0");
  require(road_width > 0.0, "road_width must be > 0");
  require(step_length > 0.0, "step_length must be > 0");
  require(step_time > 0.0, "step_time must be > 0");
  require(lookahead > 0.0, "lookahead must be > 0");
  require(max_turn > 0.0 && max_turn <= 0.5 * kPi, "max_turn must lie in (0, pi/2]");
  require(track > 0.0, "track must be > 0");
  require(odometry.sigma_s >= 0.0 && odometry.sigma_theta >= 0.0, "odometry noise must be >= 0");
  require(gps_sigma >= 0.0, "gps_sigma must be >= 0");
  require(gps_sigma_jitter >= 0.0 && gps_sigma_jitter < 1.0, "gps_sigma_jitter must lie in [0, 1)");
  require(init_sigma_xy >= 0.0 && init_sigma_theta >= 0.0, "init sigmas must be >= 0");
  require(std::abs(origin.lat) < 90.0, "origin latitude out of range");
  for (const auto& w : outages) require(w.first <= w.last, "outage window first > last");

  switch (kind) {
    case ScenarioKind::straight:
      require(length > 2.0 * step_length, "road shorter than two steps");
      break;
    case ScenarioKind::parallel:
      require(length > 2.0 * step_length, "road shorter than two steps");
      require(lane_separation > 0.0, "lane_separation must be > 0");
      break;
    case ScenarioKind::junction:
      require(branch_length > 2.0 * step_length, "branch shorter than two steps");
      require(junction_angle_deg > 0.0 && junction_angle_deg < 180.0,
              "junction angle must lie in (0, 180)");
      require(taken_branch == 0 || taken_branch == 1, "taken_branch must be 0 or 1");
      break;
    case ScenarioKind::outage:
      require(segment_length > lookahead, "segment_length must exceed the look-ahead");
      require(turn_angle_deg >= 0.0 && turn_angle_deg < 90.0, "turn angle must lie in [0, 90)");
      break;
  }
}

bool Scenario::gps_masked(std::size_t frame) const {
  return std::any_of(outages.begin(), outages.end(),
                     [&](const OutageWindow& w) { return w.contains(frame); });
}

VehicleParams Scenario::vehicle() const { return {track, odometry}; }

Scenario scenario_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("scenario must be a JSON object");
  if (!j.contains("kind")) throw std::invalid_argument("scenario needs a \"kind\"");

  try {
    Scenario s = Scenario::defaults(scenario_kind_from_string(j.at("kind").get<std::string>()));
    s.length = number_or(j, "length", s.length);
    s.branch_length = number_or(j, "branch_length", s.branch_length);
    s.segment_length = number_or(j, "segment_length", s.segment_length);
    s.turn_angle_deg = number_or(j, "turn_angle_deg", s.turn_angle_deg);
    s.lane_separation = number_or(j, "lane_separation", s.lane_separation);
    s.junction_angle_deg = number_or(j, "junction_angle_deg", s.junction_angle_deg);
    if (j.contains("taken_branch")) s.taken_branch = j.at("taken_branch").get<int>();
    s.road_width = number_or(j, "road_width", s.road_width);
    if (j.contains("origin")) {
      s.origin = {j.at("origin").at(0).get<double>(), j.at("origin").at(1).get<double>()};
    }
    s.step_length = number_or(j, "step_length", s.step_length);
    s.step_time = number_or(j, "step_time", s.step_time);
    s.lookahead = number_or(j, "lookahead", s.lookahead);
    s.max_turn = number_or(j, "max_turn", s.max_turn);
    s.track = number_or(j, "track", s.track);
    if (j.contains("odometry")) {
      s.odometry.sigma_s = number_or(j.at("odometry"), "sigma_s", s.odometry.sigma_s);
      s.odometry.sigma_theta = number_or(j.at("odometry"), "sigma_theta", s.odometry.sigma_theta);
    }
    s.gps_sigma = number_or(j, "gps_sigma", s.gps_sigma);
    s.gps_sigma_jitter = number_or(j, "gps_sigma_jitter", s.gps_sigma_jitter);
    if (j.contains("gps_bias")) {
      s.gps_bias_x = j.at("gps_bias").at(0).get<double>();
      s.gps_bias_y = j.at("gps_bias").at(1).get<double>();
    }
    if (j.contains("outages")) {
      s.outages.clear();
      for (const auto& w : j.at("outages")) {
        OutageWindow win;
        win.first = w.at(0).get<std::size_t>();
        win.last = w.size() > 1 && !w.at(1).is_null() ? w.at(1).get<std::size_t>()
                                                      : OutageWindow::kToEnd;
        s.outages.push_back(win);
      }
    }
    s.init_sigma_xy = number_or(j, "init_sigma_xy", s.init_sigma_xy);
    s.init_sigma_theta = number_or(j, "init_sigma_theta", s.init_sigma_theta);
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad scenario field: ") + e.what());
  }
}

std::string scenario_to_json(const Scenario& s) {
  nlohmann::json outages = nlohmann::json::array();
  for (const auto& w : s.outages) {
    outages.push_back(w.last == OutageWindow::kToEnd ? nlohmann::json{w.first, nullptr}
                                                     : nlohmann::json{w.first, w.last});
  }
  nlohmann::json j = {
      {"kind", std::string(to_string(s.kind))},
      {"length", s.length},
      {"branch_length", s.branch_length},
      {"segment_length", s.segment_length},
      {"turn_angle_deg", s.turn_angle_deg},
      {"lane_separation", s.lane_separation},
      {"junction_angle_deg", s.junction_angle_deg},
      {"taken_branch", s.taken_branch},
      {"road_width", s.road_width},
      {"origin", {s.origin.lat, s.origin.lon}},
      {"step_length", s.step_length},
      {"step_time", s.step_time},
      {"lookahead", s.lookahead},
      {"max_turn", s.max_turn},
      {"track", s.track},
      {"odometry", {{"sigma_s", s.odometry.sigma_s}, {"sigma_theta", s.odometry.sigma_theta}}},
      {"gps_sigma", s.gps_sigma},
      {"gps_sigma_jitter", s.gps_sigma_jitter},
      {"gps_bias", {s.gps_bias_x, s.gps_bias_y}},
      {"outages", outages},
      {"init_sigma_xy", s.init_sigma_xy},
      {"init_sigma_theta", s.init_sigma_theta},
      {"seed", s.seed},
  };
  return j.dump(2);
}

ScenarioWorld generate_scenario(const Scenario& s) {
  s.validate();
  Layout layout = build_layout(s);
  const Route& route = layout.route;

  ScenarioWorld world;
  world.map = RoadMap(std::move(layout.segments), MapErrorModel{}, s.origin);

  GroundTruth& truth = world.truth;
  const MapPoint start = route.points.front();
  const MapPoint next = route.points[1];
  truth.initial = {start.x, start.y, std::atan2(next.y - start.y, next.x - start.x)};
  truth.initial_segment = route.ids.front();

  Pose pose = truth.initial;
  std::size_t hint = 0;
  const double stop_at = route.total() - 0.5 * s.step_length;
  const auto max_steps = static_cast<std::size_t>(std::ceil(route.total() / s.step_length)) + 1;

  for (std::size_t k = 0; k < max_steps; ++k) {
    const RoutePosition here = locate(route, {pose.x, pose.y}, hint);
    hint = here.index;
    const MapPoint target = route.at(here.s + s.lookahead);
    const double dx = target.x - pose.x;
    const double dy = target.y - pose.y;
    const double reach = std::max(std::hypot(dx, dy), 1e-9);
    const double alpha = angle_difference(std::atan2(dy, dx), pose.theta);
    const double curvature = 2.0 * std::sin(alpha) / reach;
    const double dtheta = std::clamp(curvature * s.step_length, -s.max_turn, s.max_turn);

    const Pose moved = advance_pose(pose, {s.step_length, dtheta});
    const RoutePosition there = locate(route, {moved.x, moved.y}, hint);
    if (there.s > stop_at) break;

    truth.steps.push_back(
        {static_cast<double>(k + 1) * s.step_time, moved, route.ids[there.index]});
    pose = moved;
    hint = there.index;
  }

  if (layout.branch) {
    for (std::size_t i = 0; i < truth.steps.size(); ++i) {
      if (truth.steps[i].segment_id == *layout.branch) {
        world.fork_frame = i;
        break;
      }
    }
  }
  return world;
}

SensorLog simulate_sensors(const GroundTruth& truth, const Scenario& s) {
  s.validate();
  std::mt19937_64 rng(s.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const VehicleParams vehicle = s.vehicle();
  const GeoReference ref = GeoReference::at(s.origin);

  SensorLog log;
  log.init.time = truth.start_time;
  log.init.sigma_xy = s.init_sigma_xy;
  log.init.sigma_theta = s.init_sigma_theta;
  {
    const double ex = gauss(rng);
    const double ey = gauss(rng);
    const double et = gauss(rng);
    log.init.pose = {truth.initial.x + s.init_sigma_xy * ex, truth.initial.y + s.init_sigma_xy * ey,
                     normalize_angle(truth.initial.theta + s.init_sigma_theta * et)};
  }

  Pose previous = truth.initial;
  for (std::size_t i = 0; i < truth.steps.size(); ++i) {
    const TruthStep& step = truth.steps[i];
    const ElementaryMotion exact = recover_motion(previous, step.pose);
    const double dist = std::abs(exact.delta_s);
    const double ns = gauss(rng);
    const double nt = gauss(rng);
    const ElementaryMotion measured{exact.delta_s + s.odometry.sigma_s * dist * ns,
                                    exact.delta_theta + s.odometry.sigma_theta * dist * nt};

    // GPS draws happen every step so masking does not shift the odometry noise stream.
    const double jitter = unit(rng);
    const double gx = gauss(rng);
    const double gy = gauss(rng);

    LogRecord rec;
    rec.time = step.time;
    rec.odometry = elementary_to_wheel(measured, vehicle);
    if (!s.gps_masked(i)) {
      const double sigma = s.gps_sigma * (1.0 + s.gps_sigma_jitter * jitter);
      const MapPoint noisy{step.pose.x + s.gps_bias_x + sigma * gx,
                           step.pose.y + s.gps_bias_y + sigma * gy};
      const LatLon ll = map_to_latlon(noisy, ref);
      GgaFix gga;
      gga.utc_seconds = step.time;
      gga.lat = ll.lat;
      gga.lon = ll.lon;
      gga.quality = 2;
      gga.satellites = 9;
      gga.hdop = 0.9;
      gga.altitude = 50.0;
      GstStats gst;
      gst.utc_seconds = step.time;
      gst.rms = sigma;
      gst.sigma_major = sigma;
      gst.sigma_minor = sigma;
      gst.orientation_deg = 0.0;
      gst.sigma_lat = sigma;
      gst.sigma_lon = sigma;
      gst.sigma_alt = 2.0 * sigma;
      rec.nmea = {format_gga(gga), format_gst(gst)};
    }
    log.records.push_back(std::move(rec));
    previous = step.pose;
  }
  return log;
}

std::vector<MatchResult> run_matcher(const RoadMap& map, const SensorLog& log,
                                     const MatcherConfig& config) {
  const GeoReference ref = GeoReference::at(map.origin());
  Matcher matcher(map, log.init.estimate(), config, log.init.time);
  std::vector<MatchResult> results;
  results.reserve(log.records.size());
  for (const LogRecord& rec : log.records) results.push_back(matcher.step(frame_from_record(rec, ref)));
  return results;
}

}  // namespace skfmatch
