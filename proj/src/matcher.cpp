#include "skfmatch/matcher.hpp"

#include <string>

namespace skfmatch {

void MatcherConfig::validate() const {
  if (!(radius > 0.0)) throw std::invalid_argument("candidate radius must be > 0");
  skf.validate();
  vehicle.validate();
  if (map_errors) map_errors->validate();
}

double MatchResult::weight_of(SegmentId id) const {
  for (const auto& h : hypotheses) {
    if (h.segment_id == id) return h.weight;
  }
  return 0.0;
}

Matcher::Matcher(const RoadMap& map, const StateEstimate& initial, MatcherConfig config,
                 std::optional<double> start_time)
    : map_(&map),
      config_(std::move(config)),
      errors_(config_.map_errors.value_or(map.errors())),
      last_time_(start_time) {
  config_.validate();

  const auto candidates =
      select_candidates(*map_, {initial.mean.x, initial.mean.y}, config_.radius);
  if (candidates.empty()) {
    off_road_ = true;
    hypotheses_.push_back({kOffRoad, initial, 1.0});
    return;
  }
  const double w = 1.0 / static_cast<double>(candidates.size());
  for (const Segment* s : candidates) hypotheses_.push_back({s->id, initial, w});
}

MatchResult Matcher::step(const SensorFrame& frame) {
  if (last_time_ && !(frame.time > *last_time_)) {
    throw FrameRejected("frame time " + std::to_string(frame.time) +
                        " does not follow " + std::to_string(*last_time_));
  }

  const ElementaryMotion motion = wheel_to_elementary(frame.odometry, config_.vehicle);
  const StateEstimate predicted = predict(moment_match(hypotheses_), motion, config_.vehicle);
  const auto selected =
      select_candidates(*map_, {predicted.mean.x, predicted.mean.y}, config_.radius);

  std::optional<GpsObservation> gps;
  if (frame.gps) gps = build_gps_observation(*frame.gps);

  MatchResult result;
  result.step = steps_;
  result.time = frame.time;
  result.candidate_count = selected.size();
  result.gps_used = gps.has_value();

  if (selected.empty()) {
    // Dead reckoning: no road in range.
    StateEstimate estimate = predicted;
    if (gps) {
      try {
        estimate = update_with(estimate, *gps).posterior;
      } catch (const SingularInnovation&) {
        result.gps_used = false;
      }
    }
    hypotheses_ = {{kOffRoad, estimate, 1.0}};
    off_road_ = true;
  } else {
    std::vector<Candidate> candidates;
    std::vector<SegmentId> curr_ids;
    candidates.reserve(selected.size());
    curr_ids.reserve(selected.size());
    for (const Segment* s : selected) {
      candidates.push_back({s, build_carto_observation(predicted.mean, *s, errors_)});
      curr_ids.push_back(s->id);
    }
    std::vector<SegmentId> prev_ids;
    prev_ids.reserve(hypotheses_.size());
    for (const Hypothesis& h : hypotheses_) prev_ids.push_back(h.segment_id);

    const ModeTransition transition = mode_transition(prev_ids, curr_ids, *map_, config_.skf);
    StepOutcome outcome = skf_step(hypotheses_, motion, candidates, gps, transition, config_.skf,
                                   config_.vehicle);
    hypotheses_ = normalize_and_prune(std::move(outcome.hypotheses), config_.skf);
    result.uniform_fallback = outcome.uniform_fallback;
    off_road_ = false;
  }

  const Hypothesis& best = best_hypothesis(hypotheses_);
  result.best_segment = best.segment_id;
  result.best = best.estimate;
  result.best_weight = best.weight;
  result.off_road = off_road_;
  result.hypotheses.reserve(hypotheses_.size());
  for (const Hypothesis& h : hypotheses_) {
    result.hypotheses.push_back({h.segment_id, h.weight, h.estimate.mean});
  }

  last_time_ = frame.time;
  ++steps_;
  return result;
}

}  // namespace skfmatch
