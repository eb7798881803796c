#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "skfmatch/matcher.hpp"
#include "skfmatch/motion.hpp"
#include "skfmatch/road_map.hpp"
#include "skfmatch/sensor_log.hpp"

namespace skfmatch {

enum class ScenarioKind { straight, outage, parallel, junction };

std::string_view to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(std::string_view name);

/// Inclusive range of frame indices without GPS.
struct OutageWindow {
  static constexpr std::size_t kToEnd = std::numeric_limits<std::size_t>::max();
  std::size_t first = 0;
  std::size_t last = kToEnd;

  bool contains(std::size_t frame) const { return frame >= first && frame <= last; }
};

struct Scenario {
  ScenarioKind kind = ScenarioKind::straight;

  // Geometry.
  double length = 1000.0;        ///< straight/parallel road; junction stem; outage route
  double branch_length = 300.0;  ///< junction branches
  double segment_length = 250.0; ///< outage: length of each winding piece
  double turn_angle_deg = 20.0;  ///< outage: heading change at each vertex
  double lane_separation = 10.0; ///< parallel: distance between the two roads
  double junction_angle_deg = 30.0;
  int taken_branch = 0;          ///< junction: 0 bears left, 1 bears right
  double road_width = 7.0;
  MapOrigin origin{49.4179, 2.8261};

  // Vehicle motion.
  double step_length = 10.0;  ///< meters per step
  double step_time = 1.0;     ///< seconds per step
  double lookahead = 10.0;    ///< path-following look-ahead distance
  double max_turn = 0.4;      ///< cap on |delta_theta| per step, rad
  double track = 1.5;

  // Sensor noise.
  OdometryNoise odometry;
  double gps_sigma = 2.0;
  /// Per-fix sigma is drawn uniformly in gps_sigma * [1 - jitter, 1 + jitter].
  double gps_sigma_jitter = 0.0;
  double gps_bias_x = 0.0;
  double gps_bias_y = 0.0;
  std::vector<OutageWindow> outages;
  double init_sigma_xy = 1.0;
  double init_sigma_theta = 0.02;

  std::uint64_t seed = 1;

  static Scenario defaults(ScenarioKind kind);
  void validate() const;
  bool gps_masked(std::size_t frame) const;
  VehicleParams vehicle() const;
};

/// Scenario from a JSON object; absent keys keep the defaults of its "kind".
Scenario scenario_from_json(std::string_view text);
std::string scenario_to_json(const Scenario& s);

struct TruthStep {
  double time = 0.0;
  Pose pose;
  SegmentId segment_id = 0;
};

struct GroundTruth {
  double start_time = 0.0;
  Pose initial;
  SegmentId initial_segment = 0;
  std::vector<TruthStep> steps;  ///< steps[i] is the state at the end of frame i
};

struct ScenarioWorld {
  RoadMap map;
  GroundTruth truth;
  /// The branch point for junction scenarios: first frame on the taken branch.
  std::optional<std::size_t> fork_frame;
};

/// Builds the road map and a trajectory produced by the motion model itself, steered along the
/// route centerline by a pure-pursuit controller.
ScenarioWorld generate_scenario(const Scenario& s);

/// Noisy wheel increments and GGA/GST sentences for the truth, deterministic in the seed.
SensorLog simulate_sensors(const GroundTruth& truth, const Scenario& s);

struct DisambiguationEvent {
  std::size_t onset = 0;
  /// Steps from onset until the true segment's weight exceeds 0.95; empty if it never did.
  std::optional<std::size_t> steps;
};

struct Metrics {
  double correct_segment_rate = 0.0;
  double position_rmse = 0.0;
  double final_position_error = 0.0;
  std::vector<DisambiguationEvent> disambiguation;
  std::vector<double> nees;
  double mean_nees = 0.0;
};

Metrics evaluate(const std::vector<MatchResult>& results, const GroundTruth& truth);

/// Normalized estimation error squared of an estimate against a true pose.
double nees(const StateEstimate& estimate, const Pose& truth);

/// Two-sided chi-square acceptance interval [q((1-c)/2), q((1+c)/2)] for `dof` degrees of freedom.
std::pair<double, double> chi_square_band(double dof, double confidence = 0.95);

/// Fraction of samples inside the band.
double band_coverage(const std::vector<double>& samples, std::pair<double, double> band);

/// Runs the matcher over every frame.
std::vector<MatchResult> run_matcher(const RoadMap& map, const SensorLog& log,
                                     const MatcherConfig& config);

}  // namespace skfmatch
