#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "skfmatch/motion.hpp"
#include "skfmatch/observation.hpp"
#include "skfmatch/road_map.hpp"
#include "skfmatch/skf.hpp"

namespace skfmatch {

struct MatcherConfig {
  /// Candidate selection radius around the predicted position, meters.
  double radius = 30.0;
  SkfConfig skf;
  VehicleParams vehicle;
  /// Overrides the map's own error model when set.
  std::optional<MapErrorModel> map_errors;

  void validate() const;
};

/// Inputs gathered over one sampling period.
struct SensorFrame {
  double time = 0.0;
  OdometryInput odometry;
  std::optional<GpsFix> gps;
};

struct HypothesisReport {
  SegmentId segment_id = 0;
  double weight = 0.0;
  Pose pose;
};

struct MatchResult {
  std::size_t step = 0;
  double time = 0.0;
  SegmentId best_segment = kOffRoad;
  StateEstimate best;
  double best_weight = 1.0;
  std::vector<HypothesisReport> hypotheses;
  bool gps_used = false;
  std::size_t candidate_count = 0;
  bool off_road = false;
  bool uniform_fallback = false;

  /// Weight of `id`, or 0 when it carries no hypothesis.
  double weight_of(SegmentId id) const;
};

class FrameRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Multi-hypothesis road matcher for one vehicle track. Holds a reference to the map, which
/// must outlive it.
class Matcher {
 public:
  Matcher(const RoadMap& map, const StateEstimate& initial, MatcherConfig config = {},
          std::optional<double> start_time = std::nullopt);

  /// Runs one cycle. Throws FrameRejected when the frame time does not increase.
  MatchResult step(const SensorFrame& frame);

  const HypothesisSet& hypotheses() const { return hypotheses_; }
  bool off_road() const { return off_road_; }
  std::size_t steps() const { return steps_; }
  const MatcherConfig& config() const { return config_; }
  const MapErrorModel& map_errors() const { return errors_; }

 private:
  const RoadMap* map_;
  MatcherConfig config_;
  MapErrorModel errors_;
  HypothesisSet hypotheses_;
  bool off_road_ = false;
  std::optional<double> last_time_;
  std::size_t steps_ = 0;
};

}  // namespace skfmatch
